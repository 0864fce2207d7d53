//! Choice of the activation-window length.
//!
//! The objective is the coverage probability as a function of `w` (the
//! rate without its constant `log2 M` factor). It is scanned on a grid over
//! `(0, µ]`, checked for unimodality, and the best grid cell is refined by
//! golden-section search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{coverage_integral, AnalyticError, AnalyticOptions, AnalyticValue};
use crate::model::NetworkConfig;

pub const DEFAULT_GRID_POINTS: usize = 32;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub value: f64,
    pub error: f64,
}

/// A tabulated one-parameter sweep, sorted by parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: String,
    pub points: Vec<SweepPoint>,
    /// Index of the largest value.
    pub argmax: usize,
}

impl SweepResult {
    pub fn new(parameter: &str, points: Vec<SweepPoint>) -> Self {
        let argmax = points
            .iter()
            .enumerate()
            .fold(0, |best, (k, p)| if p.value > points[best].value { k } else { best });
        SweepResult {
            parameter: parameter.to_string(),
            points,
            argmax,
        }
    }

    pub fn max(&self) -> SweepPoint {
        self.points[self.argmax]
    }

    /// Rises to the maximum and falls after it, allowing each step to go
    /// the wrong way by at most the two points' combined error.
    pub fn is_unimodal(&self) -> bool {
        let p = &self.points;
        (0..p.len().saturating_sub(1)).all(|k| {
            let slack = p[k].error + p[k + 1].error;
            if k < self.argmax {
                p[k + 1].value >= p[k].value - slack
            } else {
                p[k + 1].value <= p[k].value + slack
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowOptimum {
    pub w_star: f64,
    pub value: f64,
    pub error: f64,
    pub sweep: SweepResult,
    /// Several grid points tie with the maximum within their error budget;
    /// the smallest was used.
    pub ambiguous: bool,
    /// The sweep has separated local maxima; `w_star` is the grid argmax.
    pub non_unimodal: bool,
    /// The objective vanished on the whole grid.
    pub zero_objective: bool,
    pub warnings: Vec<String>,
}

/// Coverage probability with the window length replaced by `w`; zero at
/// `w = 0`.
pub fn objective(cfg: &NetworkConfig, w: f64) -> Result<AnalyticValue, AnalyticError> {
    if w == 0.0 {
        return Ok(AnalyticValue {
            value: 0.0,
            error: 0.0,
        });
    }
    if !(w > 0.0 && w <= cfg.mu) {
        return Err(AnalyticError::InvalidArgument(format!(
            "window length {w} outside (0, mu = {}]",
            cfg.mu
        )));
    }
    Ok(coverage_integral(&cfg.with_w(w), &AnalyticOptions::default())?.coverage())
}

/// Scans `points` equally spaced window lengths `µ/n, 2µ/n, ..., µ`.
pub fn sweep_window(cfg: &NetworkConfig, points: usize) -> Result<SweepResult, AnalyticError> {
    if points == 0 {
        return Err(AnalyticError::InvalidArgument("empty sweep grid".into()));
    }
    let values: Result<Vec<SweepPoint>, AnalyticError> = (1..=points)
        .into_par_iter()
        .map(|k| {
            let w = cfg.mu * k as f64 / points as f64;
            let v = objective(cfg, w)?;
            Ok(SweepPoint {
                parameter: w,
                value: v.value,
                error: v.error,
            })
        })
        .collect();
    Ok(SweepResult::new("w", values?))
}

pub fn optimize_window(cfg: &NetworkConfig, tolerance: f64) -> Result<WindowOptimum, AnalyticError> {
    optimize_window_with(cfg, tolerance, DEFAULT_GRID_POINTS)
}

pub fn optimize_window_with(
    cfg: &NetworkConfig,
    tolerance: f64,
    grid_points: usize,
) -> Result<WindowOptimum, AnalyticError> {
    if !(tolerance > 0.0) {
        return Err(AnalyticError::InvalidArgument(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let sweep = sweep_window(cfg, grid_points)?;
    let best = sweep.max();
    let mut out = WindowOptimum {
        w_star: best.parameter,
        value: best.value,
        error: best.error,
        sweep: sweep.clone(),
        ambiguous: false,
        non_unimodal: false,
        zero_objective: false,
        warnings: Vec::new(),
    };
    if sweep.points.iter().all(|p| p.value == 0.0) {
        out.zero_objective = true;
        out.w_star = sweep.points[0].parameter;
        out.warnings.push("objective is zero on the whole grid".into());
        return Ok(out);
    }
    let tied: Vec<&SweepPoint> = sweep
        .points
        .iter()
        .filter(|p| p.value >= best.value - (p.error + best.error))
        .collect();
    if tied.len() > 1 {
        out.ambiguous = true;
        out.w_star = tied[0].parameter;
        out.value = tied[0].value;
        out.error = tied[0].error;
        out.warnings.push(format!(
            "{} grid points tie with the maximum within the error budget",
            tied.len()
        ));
        return Ok(out);
    }
    if !sweep.is_unimodal() {
        out.non_unimodal = true;
        out.warnings
            .push("sweep has separated local maxima; returning the grid argmax".into());
        return Ok(out);
    }
    let step = cfg.mu / grid_points as f64;
    let lo = (best.parameter - step).max(0.0);
    let hi = (best.parameter + step).min(cfg.mu);
    let f = |w: f64| objective(cfg, w).map(|v| v.value);
    let (w, v) = golden_section_max(f, lo, hi, tolerance)?;
    if v > best.value {
        let refined = objective(cfg, w)?;
        out.w_star = w;
        out.value = refined.value;
        out.error = refined.error;
    }
    Ok(out)
}

/// Golden-section search for the maximum of `f` on `[a, b]`, stopping when
/// the bracket is narrower than `tol`. Returns the best point evaluated.
pub fn golden_section_max<F, E>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64), E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_peak() {
        let f = |x: f64| Ok::<_, ()>(-(x - 0.3).powi(2));
        let (x, _) = golden_section_max(f, 0.0, 1.0, 1e-8).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn sweep_unimodality() {
        let mk = |vals: &[f64]| {
            SweepResult::new(
                "x",
                vals.iter()
                    .enumerate()
                    .map(|(k, &v)| SweepPoint {
                        parameter: k as f64,
                        value: v,
                        error: 0.0,
                    })
                    .collect(),
            )
        };
        assert!(mk(&[0.1, 0.5, 0.9, 0.4]).is_unimodal());
        assert!(!mk(&[0.1, 0.8, 0.3, 0.9, 0.2]).is_unimodal());
        assert_eq!(mk(&[0.1, 0.8, 0.3, 0.9, 0.2]).argmax, 3);
    }
}
