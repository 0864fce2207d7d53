//! Network parameters, window geometry and the fading model shared by the
//! analytic and simulation engines.
//!
//! Coordinates follow the UAV Palm convention: the typical UAV hovers over
//! the origin at `t = 0` and the UAV with index `i` over `(i * mu, 0)`.

mod config;
pub mod units;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{load_config, load_config_file, parse_field, ConfigDocument};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("missing required field '{0}'")]
    MissingField(String),
    #[error("unknown field '{0}'")]
    UnknownField(String),
    #[error("field '{key}': cannot parse '{value}': {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("field '{key}' = {value} violates {bound}")]
    Invariant {
        key: &'static str,
        value: f64,
        bound: String,
    },
    #[error("malformed config document: {0}")]
    Syntax(String),
    #[error("cannot read config: {0}")]
    Io(String),
}

/// Strip model (one UAV line over a strip of devices) or lattice of
/// parallel UAV lines over the whole plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Mode {
    #[default]
    #[serde(rename = "1d")]
    Strip,
    #[serde(rename = "2d")]
    Lattice,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1d" | "1-d" | "strip" => Ok(Mode::Strip),
            "2d" | "2-d" | "lattice" => Ok(Mode::Lattice),
            other => Err(format!("unknown mode '{other}' (expected 1d or 2d)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Strip => "1d",
            Mode::Lattice => "2d",
        })
    }
}

/// Full parameter set, strict SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// IoT device density, devices per m².
    pub lambda: f64,
    /// Inter-UAV distance along a trajectory (m).
    pub mu: f64,
    /// Spacing between parallel trajectories (m); lattice mode only.
    pub nu: Option<f64>,
    /// UAV altitude (m).
    pub h: f64,
    /// Activation window length along the direction of motion (m).
    pub w: f64,
    /// Activation window width (m). Equals the strip width in strip mode.
    pub l: f64,
    /// UAV speed (m/s).
    pub v: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Nakagami shape.
    pub m: u32,
    /// Mean fading power gain.
    pub omega: f64,
    /// Transmit power (W).
    pub p: f64,
    /// SIR/SINR threshold, linear.
    pub tau: f64,
    /// Thermal noise power (W); zero means pure SIR.
    pub noise: f64,
    /// Distance at which path loss is unity: received power is
    /// `p * G * (d / pathloss_ref)^-alpha`.
    pub pathloss_ref: f64,
    pub mode: Mode,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            lambda: 1e-4,
            mu: 1000.0,
            nu: None,
            h: 200.0,
            w: 250.0,
            l: 500.0,
            v: 10.0,
            alpha: 4.0,
            m: 1,
            omega: 1.0,
            p: 1.0,
            tau: 1.0,
            noise: 0.0,
            pathloss_ref: 1.0,
            mode: Mode::Strip,
        }
    }
}

fn check(key: &'static str, value: f64, ok: bool, bound: &str) -> Result<(), ConfigError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invariant {
            key,
            value,
            bound: bound.to_string(),
        })
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check("lambda", self.lambda, self.lambda >= 0.0, "lambda >= 0")?;
        check("mu", self.mu, self.mu > 0.0, "mu > 0")?;
        check("w", self.w, self.w > 0.0, "0 < w")?;
        check("w", self.w, self.w <= self.mu, &format!("w <= mu ({})", self.mu))?;
        check("l", self.l, self.l > 0.0, "0 < l")?;
        check("h", self.h, self.h > 0.0, "h > 0")?;
        check("v", self.v, self.v > 0.0, "v > 0")?;
        check("alpha", self.alpha, self.alpha > 1.0, "alpha > 1")?;
        check("m", self.m as f64, self.m >= 1, "m >= 1")?;
        check("omega", self.omega, self.omega > 0.0, "omega > 0")?;
        check("p", self.p, self.p > 0.0, "p > 0")?;
        check("tau", self.tau, self.tau > 0.0, "tau > 0")?;
        check("noise", self.noise, self.noise >= 0.0, "noise >= 0")?;
        check(
            "pathloss_ref",
            self.pathloss_ref,
            self.pathloss_ref > 0.0,
            "pathloss_ref > 0",
        )?;
        if let Some(nu) = self.nu {
            check("nu", nu, nu > 0.0, "nu > 0")?;
        }
        if self.mode == Mode::Lattice {
            let nu = self.nu.ok_or_else(|| ConfigError::MissingField("nu".into()))?;
            check("l", self.l, self.l <= nu, &format!("l <= nu ({nu}) in 2d mode"))?;
            // Planar interference is only finite for alpha > 2.
            check("alpha", self.alpha, self.alpha > 2.0, "alpha > 2 in 2d mode")?;
        }
        Ok(())
    }

    /// Mean number of devices per window, `lambda * w * l`.
    pub fn mean_devices_per_window(&self) -> f64 {
        self.lambda * self.w * self.l
    }

    /// Probability that a window holds at least one device.
    pub fn occupancy(&self) -> f64 {
        -(-self.mean_devices_per_window()).exp_m1()
    }

    /// Trajectory spacing used for lattice geometry.
    pub fn row_spacing(&self) -> f64 {
        self.nu.unwrap_or(f64::INFINITY)
    }

    pub fn fading(&self) -> FadingModel {
        FadingModel::new(self.m, self.omega)
    }

    /// Received power from distance `d` with unit fading gain.
    pub fn path_gain(&self, d: f64) -> f64 {
        (d / self.pathloss_ref).powf(-self.alpha)
    }

    pub fn with_w(&self, w: f64) -> Self {
        NetworkConfig { w, ..self.clone() }
    }

    pub fn with_v(&self, v: f64) -> Self {
        NetworkConfig { v, ..self.clone() }
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        NetworkConfig { tau, ..self.clone() }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        NetworkConfig {
            lambda,
            ..self.clone()
        }
    }
}

/// An activation window: a `w x l` ground rectangle centered under a UAV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowGeom {
    pub i: i64,
    pub j: i64,
    pub x_center: f64,
    pub y_center: f64,
    pub half_w: f64,
    pub half_l: f64,
}

impl WindowGeom {
    pub fn x_range(&self) -> (f64, f64) {
        (self.x_center - self.half_w, self.x_center + self.half_w)
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.y_center - self.half_l, self.y_center + self.half_l)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.x_center).abs() <= self.half_w && (y - self.y_center).abs() <= self.half_l
    }

    /// True when the interiors intersect.
    pub fn overlaps(&self, other: &WindowGeom) -> bool {
        (self.x_center - other.x_center).abs() < self.half_w + other.half_w
            && (self.y_center - other.y_center).abs() < self.half_l + other.half_l
    }

    /// Smallest ground distance from the origin to any point of the window.
    pub fn min_ground_distance(&self) -> f64 {
        let gap = |c: f64, half: f64| (c.abs() - half).max(0.0);
        gap(self.x_center, self.half_w).hypot(gap(self.y_center, self.half_l))
    }
}

/// Window of UAV `i` at time `t` in the Palm frame: centered at `i * mu + v * t`.
pub fn window_center(cfg: &NetworkConfig, i: i64, t: f64) -> WindowGeom {
    window_center_2d(cfg, i, 0, t)
}

/// Window of UAV `(i, j)` in the lattice model; row `j` sits at `y = j * nu`.
pub fn window_center_2d(cfg: &NetworkConfig, i: i64, j: i64, t: f64) -> WindowGeom {
    let y_center = if j == 0 {
        0.0
    } else {
        j as f64 * cfg.row_spacing()
    };
    WindowGeom {
        i,
        j,
        x_center: i as f64 * cfg.mu + cfg.v * t,
        y_center,
        half_w: 0.5 * cfg.w,
        half_l: 0.5 * cfg.l,
    }
}

/// Nakagami-m power fading: `G ~ Gamma(m, omega / m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingModel {
    pub m: u32,
    pub omega: f64,
}

impl FadingModel {
    pub fn new(m: u32, omega: f64) -> Self {
        assert!(m >= 1 && omega > 0.0, "invalid fading model");
        FadingModel { m, omega }
    }

    pub fn rayleigh() -> Self {
        FadingModel { m: 1, omega: 1.0 }
    }

    pub fn distribution(&self) -> Gamma<f64> {
        Gamma::new(self.m as f64, self.omega / self.m as f64).expect("validated shape/scale")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.distribution().sample(rng)
    }

    /// `E[exp(-s G)] = (1 + s omega / m)^-m`.
    pub fn laplace(&self, s: f64) -> f64 {
        (1.0 + s * self.omega / self.m as f64).powi(-(self.m as i32))
    }

    /// `P(G >= x)` as the finite Poisson sum `sum_{k<m} e^{-y} y^k / k!`,
    /// `y = m x / omega`.
    pub fn ccdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let y = self.m as f64 * x / self.omega;
        let mut term = (-y).exp();
        let mut sum = term;
        for k in 1..self.m {
            term *= y / k as f64;
            sum += term;
        }
        sum
    }

    /// Same quantity through the regularized upper incomplete gamma function.
    pub fn ccdf_incomplete_gamma(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        statrs::function::gamma::gamma_ur(self.m as f64, self.m as f64 * x / self.omega)
    }
}

/// How many bits each successful slot carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulationRule {
    /// A fixed `M`-ary constellation.
    Fixed(u32),
    /// `M = 2^floor(log2(1 + tau))`.
    FloorLog2,
    /// Continuous `log2(1 + tau)`.
    Shannon,
}

impl Default for ModulationRule {
    fn default() -> Self {
        ModulationRule::FloorLog2
    }
}

impl ModulationRule {
    /// Constellation size `M` (not necessarily an integer for `Shannon`).
    pub fn order(&self, tau: f64) -> f64 {
        match *self {
            ModulationRule::Fixed(m) => m as f64,
            ModulationRule::FloorLog2 => 2f64.powi(floor_log2_1p(tau) as i32),
            ModulationRule::Shannon => 1.0 + tau,
        }
    }

    /// `log2(M)`.
    pub fn bits(&self, tau: f64) -> f64 {
        match *self {
            ModulationRule::Fixed(m) => (m as f64).log2(),
            ModulationRule::FloorLog2 => floor_log2_1p(tau) as f64,
            ModulationRule::Shannon => tau.ln_1p() / std::f64::consts::LN_2,
        }
    }
}

impl std::str::FromStr for ModulationRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "floor" | "floor-log2" => Ok(ModulationRule::FloorLog2),
            "shannon" => Ok(ModulationRule::Shannon),
            other => match other.parse::<u32>() {
                Ok(m) if m >= 2 => Ok(ModulationRule::Fixed(m)),
                _ => Err(format!(
                    "modulation must be 'floor', 'shannon' or an integer M >= 2, got '{other}'"
                )),
            },
        }
    }
}

/// `floor(log2(1 + tau))`, exact at powers of two.
fn floor_log2_1p(tau: f64) -> u32 {
    if !(tau > 0.0) {
        return 0;
    }
    let x = 1.0 + tau;
    let mut k = x.log2().floor().max(0.0) as u32;
    // guard against log2 rounding just below an integer
    while 2f64.powi(k as i32 + 1) <= x {
        k += 1;
    }
    while k > 0 && 2f64.powi(k as i32) > x {
        k -= 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn window_centers() {
        let cfg = NetworkConfig {
            mu: 2000.0,
            v: 10.0,
            ..Default::default()
        };
        assert_eq!(window_center(&cfg, 0, 0.0).x_center, 0.0);
        assert_eq!(window_center(&cfg, 1, 0.0).x_center, 2000.0);
        assert_eq!(window_center(&cfg, 0, 5.0).x_center, 50.0);
        let win = window_center(&cfg, 0, 0.0);
        assert_eq!(win.x_range(), (-125.0, 125.0));
        assert_eq!(win.y_range(), (-250.0, 250.0));
    }

    #[test]
    fn validation_bounds() {
        let ok = NetworkConfig::default();
        ok.validate().unwrap();
        let err = NetworkConfig { w: 3000.0, mu: 2000.0, ..ok.clone() }
            .validate()
            .unwrap_err();
        assert!(matches!(err, ConfigError::Invariant { key: "w", .. }));
        let err = NetworkConfig { alpha: 0.5, ..ok.clone() }.validate().unwrap_err();
        assert!(matches!(err, ConfigError::Invariant { key: "alpha", .. }));
        let lattice = NetworkConfig {
            mode: Mode::Lattice,
            ..ok.clone()
        };
        assert!(matches!(
            lattice.validate().unwrap_err(),
            ConfigError::MissingField(_)
        ));
        let lattice = NetworkConfig {
            nu: Some(400.0),
            ..lattice
        };
        assert!(matches!(
            lattice.validate().unwrap_err(),
            ConfigError::Invariant { key: "l", .. }
        ));
    }

    #[test]
    fn occupancy_matches_closed_form() {
        // 500/km², 100 m x 100 m windows: lambda w l = 5.
        let cfg = NetworkConfig {
            lambda: 500e-6,
            w: 100.0,
            l: 100.0,
            ..Default::default()
        };
        assert!((cfg.mean_devices_per_window() - 5.0).abs() < 1e-12);
        assert!((cfg.occupancy() - 0.993_262_053_000_914_7).abs() < 1e-15);
    }

    #[test]
    fn floor_modulation() {
        let r = ModulationRule::FloorLog2;
        assert_eq!(r.order(0.5), 1.0);
        assert_eq!(r.bits(0.5), 0.0);
        assert_eq!(r.order(1.0), 2.0);
        assert_eq!(r.order(3.0), 4.0);
        assert_eq!(r.order(2.999), 2.0);
        assert_eq!(r.order(7.0), 8.0);
        assert_eq!(r.bits(1e3), 9.0);
        for tau in [1.0, 1.5, 2.0, 3.0, 10.0, 31.0, 100.0, 1e4] {
            let expect = 2f64.powf((1.0f64 + tau).log2().floor());
            assert_eq!(r.order(tau), expect, "tau = {tau}");
        }
        assert_eq!(ModulationRule::Fixed(16).bits(0.1), 4.0);
    }

    #[test]
    fn gamma_ccdf_two_routes_agree() {
        for m in 1..=4 {
            let f = FadingModel::new(m, 1.7);
            for &x in &[1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 12.0] {
                let a = f.ccdf(x);
                let b = f.ccdf_incomplete_gamma(x);
                assert!((a - b).abs() < 1e-10, "m={m} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fading_sample_mean() {
        let f = FadingModel::new(3, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mean = (0..n).map(|_| f.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean / 2.0 - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn rayleigh_is_unit_exponential() {
        let f = FadingModel::rayleigh();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut xs: Vec<f64> = (0..100_000).map(|_| f.sample(&mut rng)).collect();
        assert!(xs.iter().all(|&g| g > 0.0));
        xs.sort_by(f64::total_cmp);
        let d = crate::stats::ks_statistic(&xs, |x| 1.0 - (-x).exp());
        assert!(d < 0.01, "KS distance {d}");
    }
}
