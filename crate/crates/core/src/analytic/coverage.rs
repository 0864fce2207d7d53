//! Coverage probability, data rate and harvested data.
//!
//! All three metrics share one inner quantity, the conditional coverage
//!
//! `C = 1/(wl) ∬_{W_0} sum_{k<m} (-s)^k/k! L_I^(k)(s) dy dx`,
//! `s = τ m (d / d_ref)^α / (p Ω)`,
//!
//! from which coverage is `q C`, the rate `log2(M) q C` and the harvested
//! data `log2(M) C (w / v) q / (λ w l)` with `q = 1 - e^{-λwl}`.

use serde::{Deserialize, Serialize};

use super::{AnalyticError, LaplaceEvaluator, ProductTruncation};
use crate::model::{Mode, ModulationRule, NetworkConfig};
use crate::quadrature::{integrate, QuadratureSpec, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticOptions {
    pub truncation: ProductTruncation,
    /// Rule for the per-window integrals inside the Laplace products.
    pub window_quadrature: QuadratureSpec,
    /// Rule for the outer integral over the serving window.
    pub outer_quadrature: QuadratureSpec,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        AnalyticOptions {
            truncation: ProductTruncation::default(),
            window_quadrature: QuadratureSpec::default(),
            outer_quadrature: QuadratureSpec {
                nodes: 16,
                rel_tol: 1e-9,
                abs_tol: 1e-14,
                max_depth: 4,
            },
        }
    }
}

/// A metric value with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticValue {
    pub value: f64,
    pub error: f64,
}

/// The shared conditional-coverage integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageIntegral {
    /// `P(SIR >= τ | own window nonempty)`.
    pub conditional: f64,
    /// Outer quadrature error estimate.
    pub quad_error: f64,
    /// Largest Laplace error budget over the serving window (truncation
    /// tail plus inner quadrature).
    pub laplace_error: f64,
    pub occupancy: f64,
    /// Mean devices per window `λ w l`.
    pub devices_per_window: f64,
    /// Mean in-window time `w / v`.
    pub window_time: f64,
    pub rings: usize,
    pub capped: bool,
}

impl CoverageIntegral {
    pub fn error(&self) -> f64 {
        self.quad_error + self.laplace_error
    }

    pub fn conditional_coverage(&self) -> AnalyticValue {
        AnalyticValue {
            value: self.conditional,
            error: self.error(),
        }
    }

    pub fn coverage(&self) -> AnalyticValue {
        AnalyticValue {
            value: self.occupancy * self.conditional,
            error: self.occupancy * self.error(),
        }
    }

    pub fn rate(&self, bits: f64) -> AnalyticValue {
        let c = self.coverage();
        AnalyticValue {
            value: bits * c.value,
            error: bits * c.error,
        }
    }

    pub fn conditional_rate(&self, bits: f64) -> AnalyticValue {
        AnalyticValue {
            value: bits * self.conditional,
            error: bits * self.error(),
        }
    }

    /// Bits per hertz per passage. Uses `q / (λwl) -> 1` at `λ = 0`.
    pub fn harvested(&self, bits: f64) -> AnalyticValue {
        let k = self.devices_per_window;
        let ratio = if k > 0.0 { self.occupancy / k } else { 1.0 };
        let scale = bits * self.window_time * ratio;
        AnalyticValue {
            value: scale * self.conditional,
            error: scale * self.error(),
        }
    }
}

/// Evaluates the conditional-coverage integral (SINR when `cfg.noise > 0`).
pub fn coverage_integral(
    cfg: &NetworkConfig,
    opts: &AnalyticOptions,
) -> Result<CoverageIntegral, AnalyticError> {
    let eval = LaplaceEvaluator::with_options(cfg, true, opts.truncation, opts.window_quadrature)?;
    let order = cfg.m as usize;
    let s_of = |x: f64, y: f64| {
        let d2 = (x * x + y * y + cfg.h * cfg.h) / (cfg.pathloss_ref * cfg.pathloss_ref);
        cfg.tau * cfg.m as f64 * d2.powf(0.5 * cfg.alpha) / (cfg.p * cfg.omega)
    };
    let (hw, hl) = (0.5 * cfg.w, 0.5 * cfg.l);
    let s_max = s_of(hw, hl);
    // one ring count for the whole window keeps the integrand smooth
    let (rings, capped) = eval.rings_needed(s_max);
    let worst = eval.jet_with_rings(s_max, order, cfg.noise, rings, capped)?.1;
    let integrand = |x: f64, y: f64| match eval.jet_with_rings(s_of(x, y), order, cfg.noise, rings, capped) {
        Ok((jet, _)) => jet.sum(),
        Err(_) => f64::NAN,
    };
    // the integrand depends on x² + y² only, so one quarter suffices
    let quarter = Rect::new(0.0, hw, 0.0, hl);
    let integral = integrate(&quarter, &opts.outer_quadrature, &integrand)?;
    let area = quarter.area();
    Ok(CoverageIntegral {
        conditional: integral.value / area,
        quad_error: integral.error / area,
        laplace_error: worst.error(),
        occupancy: cfg.occupancy(),
        devices_per_window: cfg.mean_devices_per_window(),
        window_time: cfg.w / cfg.v,
        rings: worst.rings,
        capped: worst.capped,
    })
}

pub fn coverage_probability(cfg: &NetworkConfig) -> Result<AnalyticValue, AnalyticError> {
    Ok(coverage_integral(cfg, &AnalyticOptions::default())?.coverage())
}

pub fn conditional_coverage(cfg: &NetworkConfig) -> Result<AnalyticValue, AnalyticError> {
    Ok(coverage_integral(cfg, &AnalyticOptions::default())?.conditional_coverage())
}

pub fn mean_rate(
    cfg: &NetworkConfig,
    modulation: ModulationRule,
) -> Result<AnalyticValue, AnalyticError> {
    let bits = modulation.bits(cfg.tau);
    Ok(coverage_integral(cfg, &AnalyticOptions::default())?.rate(bits))
}

/// Rate given that the own window holds at least one device.
pub fn conditional_rate(
    cfg: &NetworkConfig,
    modulation: ModulationRule,
) -> Result<AnalyticValue, AnalyticError> {
    let bits = modulation.bits(cfg.tau);
    Ok(coverage_integral(cfg, &AnalyticOptions::default())?.conditional_rate(bits))
}

pub fn harvested_data(
    cfg: &NetworkConfig,
    modulation: ModulationRule,
) -> Result<AnalyticValue, AnalyticError> {
    let bits = modulation.bits(cfg.tau);
    Ok(coverage_integral(cfg, &AnalyticOptions::default())?.harvested(bits))
}

fn require_lattice(cfg: &NetworkConfig) -> Result<(), AnalyticError> {
    if cfg.mode == Mode::Lattice {
        Ok(())
    } else {
        Err(AnalyticError::InvalidArgument(
            "2d metrics need a config in 2d mode".into(),
        ))
    }
}

pub fn coverage_probability_2d(cfg: &NetworkConfig) -> Result<AnalyticValue, AnalyticError> {
    require_lattice(cfg)?;
    coverage_probability(cfg)
}

pub fn mean_rate_2d(
    cfg: &NetworkConfig,
    modulation: ModulationRule,
) -> Result<AnalyticValue, AnalyticError> {
    require_lattice(cfg)?;
    mean_rate(cfg, modulation)
}
