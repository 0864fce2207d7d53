//! Laplace transforms of the shot-noise and interference seen by the
//! typical UAV.
//!
//! Each window contributes a factor
//! `e^{-λwl} + (1 - e^{-λwl}) * mean_{window} (1 + s p Ω / m * g(x, y))^-m`
//! where `g` is the path gain to the typical UAV at `(0, 0, h)`. The
//! infinite product is truncated ring by ring (a ring is one window pair
//! `±i` on the strip, or the square ring `max(|i|, |j|) = k` on the
//! lattice) once a window's deficit `1 - factor` is provably below
//! `epsilon`. The neglected tail is bounded through `1 - factor <=
//! q s p Ω g_max`, summed with an integral comparison.

use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use super::jet::{rising_binomial, Jet, MAX_ORDER};
use super::AnalyticError;
use crate::model::{window_center_2d, Mode, NetworkConfig, WindowGeom};
use crate::quadrature::{gauss_legendre, integrate, nodes_for_ratio, QuadratureSpec, Rect};

/// Where to cut the product over windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductTruncation {
    /// Largest deficit `1 - factor` allowed for the first neglected window.
    pub epsilon: f64,
    /// Safety cap on the ring index in strip mode.
    pub k_max_cap: usize,
    /// Safety cap on the ring index in lattice mode (cost grows as K²).
    pub ring_cap_2d: usize,
}

impl Default for ProductTruncation {
    fn default() -> Self {
        ProductTruncation {
            epsilon: 1e-10,
            k_max_cap: 100_000,
            ring_cap_2d: 400,
        }
    }
}

/// A Laplace-transform (or derivative-sum) value with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceValue {
    pub value: f64,
    /// Upper bound on `sum (1 - factor)` over the neglected windows. The
    /// true value lies in `[value - tail_bound, value]`.
    pub tail_bound: f64,
    /// Estimated error from the per-window quadrature rules.
    pub quad_error: f64,
    /// Rings kept in the product.
    pub rings: usize,
    /// The ring cap was hit before the truncation criterion was met.
    pub capped: bool,
}

impl LaplaceValue {
    pub fn error(&self) -> f64 {
        self.tail_bound + self.quad_error
    }
}

/// Cached quadrature nodes of one window, independent of `s`.
#[derive(Debug, Clone)]
struct WindowQuad {
    /// `(weight, g)` with weights normalized to sum to one.
    nodes: Vec<(f64, f64)>,
    /// `|mean g (rule) - mean g (companion rule)|`, a proxy for the rule error.
    gain_err: f64,
    multiplicity: u32,
}

/// Evaluates products of window factors for one network configuration.
#[derive(Debug)]
pub struct LaplaceEvaluator {
    cfg: NetworkConfig,
    pub truncation: ProductTruncation,
    pub quadrature: QuadratureSpec,
    /// Drop the typical UAV's own window (interference instead of
    /// shot-noise).
    pub exclude_center: bool,
    /// Thermal noise multiplied in as `e^{-s N0}`; zero disables it.
    pub noise: f64,
    rings: RwLock<Vec<Vec<WindowQuad>>>,
}

impl Clone for LaplaceEvaluator {
    fn clone(&self) -> Self {
        LaplaceEvaluator {
            cfg: self.cfg.clone(),
            truncation: self.truncation,
            quadrature: self.quadrature,
            exclude_center: self.exclude_center,
            noise: self.noise,
            rings: RwLock::new(self.rings.read().unwrap().clone()),
        }
    }
}

impl LaplaceEvaluator {
    pub fn new(cfg: &NetworkConfig, exclude_center: bool) -> Result<Self, AnalyticError> {
        Self::with_options(
            cfg,
            exclude_center,
            ProductTruncation::default(),
            QuadratureSpec::default(),
        )
    }

    pub fn with_options(
        cfg: &NetworkConfig,
        exclude_center: bool,
        truncation: ProductTruncation,
        quadrature: QuadratureSpec,
    ) -> Result<Self, AnalyticError> {
        cfg.validate()?;
        if cfg.m as usize > MAX_ORDER {
            return Err(AnalyticError::UnsupportedOrder {
                order: cfg.m as usize,
                cap: MAX_ORDER,
            });
        }
        Ok(LaplaceEvaluator {
            cfg: cfg.clone(),
            truncation,
            quadrature,
            exclude_center,
            noise: 0.0,
            rings: RwLock::new(Vec::new()),
        })
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    fn lattice(&self) -> bool {
        self.cfg.mode == Mode::Lattice
    }

    fn window(&self, i: i64, j: i64) -> WindowGeom {
        window_center_2d(&self.cfg, i, j, 0.0)
    }

    /// `q s p Ω` with `q` the occupancy: the deficit bound per unit gain.
    fn amplitude(&self, s: f64) -> f64 {
        self.cfg.occupancy() * s * self.cfg.p * self.cfg.omega
    }

    fn ring_cap(&self) -> usize {
        if self.lattice() {
            self.truncation.ring_cap_2d
        } else {
            self.truncation.k_max_cap
        }
    }

    /// Rings needed so that every neglected window has deficit below
    /// epsilon, and whether the cap cut that short.
    pub fn rings_needed(&self, s: f64) -> (usize, bool) {
        let amp = self.amplitude(s);
        if amp <= 0.0 {
            return (0, false);
        }
        let c = &self.cfg;
        // distance beyond which amp * (d / ref)^-alpha <= epsilon
        let d = c.pathloss_ref * (amp / self.truncation.epsilon).powf(1.0 / c.alpha);
        let ground = (d * d - c.h * c.h).max(0.0).sqrt();
        let mut need = (ground + 0.5 * c.w) / c.mu;
        if self.lattice() {
            need = need.max((ground + 0.5 * c.l) / c.row_spacing());
        }
        let k = (need.ceil() as usize).saturating_sub(1);
        let cap = self.ring_cap();
        if k > cap {
            (cap, true)
        } else {
            (k, false)
        }
    }

    /// Bound on `sum (1 - factor)` over rings beyond `k`.
    pub fn tail_bound(&self, s: f64, k: usize) -> f64 {
        let amp = self.amplitude(s);
        if amp <= 0.0 {
            return 0.0;
        }
        let c = &self.cfg;
        let a = c.alpha;
        let scale = amp * c.pathloss_ref.powf(a);
        if self.lattice() {
            let delta = c.mu.min(c.row_spacing());
            let kk = k as f64 + 0.5;
            let first = 8.0 * (k as f64 + 1.0) * ((kk * delta).powi(2) + c.h * c.h).powf(-0.5 * a);
            let rest = delta.powf(-a)
                * (8.0 * kk.powf(2.0 - a) / (a - 2.0) + 4.0 * kk.powf(1.0 - a) / (a - 1.0));
            scale * (first + rest)
        } else {
            let x = (k as f64 + 1.0) * c.mu - 0.5 * c.w;
            let first = (x * x + c.h * c.h).powf(-0.5 * a);
            let rest = x.powf(1.0 - a) / (c.mu * (a - 1.0));
            2.0 * scale * (first + rest)
        }
    }

    fn ring_members(&self, k: usize) -> Vec<(i64, i64, u32)> {
        let k = k as i64;
        if !self.lattice() {
            return vec![(k, 0, if k == 0 { 1 } else { 2 })];
        }
        let mult = |i: i64, j: i64| (if i > 0 { 2 } else { 1 }) * (if j > 0 { 2 } else { 1 });
        let mut out = Vec::new();
        for j in 0..=k {
            out.push((k, j, mult(k, j)));
        }
        for i in 0..k {
            out.push((i, k, mult(i, k)));
        }
        out
    }

    fn ensure_rings(&self, k: usize) {
        if self.rings.read().unwrap().len() > k {
            return;
        }
        let mut rings = self.rings.write().unwrap();
        while rings.len() <= k {
            let idx = rings.len();
            let ring = self
                .ring_members(idx)
                .into_iter()
                .map(|(i, j, mult)| self.build_window(i, j, mult))
                .collect();
            rings.push(ring);
        }
    }

    fn build_window(&self, i: i64, j: i64, multiplicity: u32) -> WindowQuad {
        let c = &self.cfg;
        let win = self.window(i, j);
        let (x0, x1) = win.x_range();
        let (y0, y1) = win.y_range();
        let nearest = |a: f64, b: f64| if a <= 0.0 && b >= 0.0 { 0.0 } else { a.abs().min(b.abs()) };
        let ex = (c.h * c.h + nearest(y0, y1).powi(2)).sqrt();
        let ey = (c.h * c.h + nearest(x0, x1).powi(2)).sqrt();
        let max_nodes = self.quadrature.nodes;
        let build = |coarse: bool| {
            let xs = symmetric_axis(x0, x1, ex, max_nodes, coarse);
            let ys = symmetric_axis(y0, y1, ey, max_nodes, coarse);
            let area = (x1 - x0) * (y1 - y0);
            let mut nodes = Vec::with_capacity(xs.len() * ys.len());
            for &(x, wx) in &xs {
                for &(y, wy) in &ys {
                    let d2 = x * x + y * y + c.h * c.h;
                    let g = (d2 / (c.pathloss_ref * c.pathloss_ref)).powf(-0.5 * c.alpha);
                    nodes.push((wx * wy / area, g));
                }
            }
            nodes
        };
        let nodes = build(false);
        let companion = build(true);
        let mean = |ns: &[(f64, f64)]| ns.iter().map(|&(w, g)| w * g).sum::<f64>();
        let gain_err = (mean(&nodes) - mean(&companion)).abs();
        WindowQuad {
            nodes,
            gain_err,
            multiplicity,
        }
    }

    fn window_jet(&self, quad: &WindowQuad, s: f64, order: usize) -> Jet {
        let c = &self.cfg;
        let q = c.occupancy();
        let scoef = s * c.p * c.omega / c.m as f64;
        let mut deficit = 0.0;
        let mut acc = [0.0; MAX_ORDER];
        for &(wt, g) in &quad.nodes {
            let z = scoef * g;
            let u = 1.0 / (1.0 + z);
            let r = z * u;
            // 1 - u^m = r (1 + u + ... + u^{m-1})
            let mut um = 1.0;
            let mut geo = 0.0;
            for _ in 0..c.m {
                geo += um;
                um *= u;
            }
            deficit += wt * r * geo;
            let mut term = wt * um;
            for a in acc.iter_mut().take(order).skip(1) {
                term *= r;
                *a += term;
            }
        }
        let mut coeffs = [0.0; MAX_ORDER];
        coeffs[0] = 1.0 - q * deficit;
        for k in 1..order {
            coeffs[k] = q * rising_binomial(c.m, k) * acc[k];
        }
        Jet::from_coeffs(&coeffs[..order])
    }

    /// Jet of the truncated product (times the noise term when enabled).
    pub fn jet(&self, s: f64, order: usize) -> Result<(Jet, LaplaceValue), AnalyticError> {
        self.jet_with_noise(s, order, self.noise)
    }

    pub(crate) fn jet_with_noise(
        &self,
        s: f64,
        order: usize,
        noise: f64,
    ) -> Result<(Jet, LaplaceValue), AnalyticError> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(AnalyticError::InvalidArgument(format!(
                "Laplace argument must be finite and >= 0, got {s}"
            )));
        }
        if order == 0 || order > MAX_ORDER {
            return Err(AnalyticError::UnsupportedOrder {
                order,
                cap: MAX_ORDER,
            });
        }
        let (k, capped) = self.rings_needed(s);
        self.jet_with_rings(s, order, noise, k, capped)
    }

    /// As [`Self::jet_with_noise`] but keeping exactly rings `0..=k`, so
    /// that the result is smooth in `s` (used inside outer integrals).
    pub(crate) fn jet_with_rings(
        &self,
        s: f64,
        order: usize,
        noise: f64,
        k: usize,
        capped: bool,
    ) -> Result<(Jet, LaplaceValue), AnalyticError> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(AnalyticError::InvalidArgument(format!(
                "Laplace argument must be finite and >= 0, got {s}"
            )));
        }
        if order == 0 || order > MAX_ORDER {
            return Err(AnalyticError::UnsupportedOrder {
                order,
                cap: MAX_ORDER,
            });
        }
        self.ensure_rings(k);
        let rings = self.rings.read().unwrap();
        let mut jet = Jet::one(order);
        let mut quad_error = 0.0;
        let start = usize::from(self.exclude_center);
        if s > 0.0 {
            for ring in rings.iter().take(k + 1).skip(start) {
                for quad in ring {
                    let wj = self.window_jet(quad, s, order);
                    jet = jet.mul(&wj.powu(quad.multiplicity));
                    quad_error += quad.multiplicity as f64 * quad.gain_err;
                }
            }
            if noise > 0.0 {
                jet = jet.mul(&Jet::noise(s, noise, order));
            }
        }
        let budget = LaplaceValue {
            value: jet.sum(),
            tail_bound: self.tail_bound(s, k),
            quad_error: quad_error * self.amplitude(s),
            rings: k,
            capped,
        };
        Ok((jet, budget))
    }

    /// The transform itself.
    pub fn evaluate(&self, s: f64) -> Result<LaplaceValue, AnalyticError> {
        let (jet, mut out) = self.jet(s, 1)?;
        out.value = jet.value();
        Ok(out)
    }

    /// `sum_{i<order} (-s)^i / i! * d^i/ds^i L(s)`, with derivatives taken
    /// analytically through the product.
    pub fn derivative_sum(&self, s: f64, order: usize) -> Result<LaplaceValue, AnalyticError> {
        let (jet, mut out) = self.jet(s, order)?;
        out.value = jet.sum();
        Ok(out)
    }

    /// Factor of window `(i, j)` from an adaptive, error-checked integral.
    pub fn factor_window(&self, s: f64, i: i64, j: i64) -> Result<f64, AnalyticError> {
        if !(s >= 0.0) {
            return Err(AnalyticError::InvalidArgument(format!("s must be >= 0, got {s}")));
        }
        let c = &self.cfg;
        if s == 0.0 || c.lambda == 0.0 {
            return Ok(1.0);
        }
        let win = self.window(i, j);
        let (x0, x1) = win.x_range();
        let (y0, y1) = win.y_range();
        let scoef = s * c.p * c.omega / c.m as f64;
        let deficit = |x: f64, y: f64| {
            let d2 = x * x + y * y + c.h * c.h;
            let z = scoef * (d2 / (c.pathloss_ref * c.pathloss_ref)).powf(-0.5 * c.alpha);
            -(-(c.m as f64) * z.ln_1p()).exp_m1()
        };
        let spec = QuadratureSpec {
            abs_tol: 0.0,
            ..self.quadrature
        };
        let rect = Rect::new(x0, x1, y0, y1);
        let integral = integrate(&rect, &spec, &deficit)?;
        Ok(1.0 - c.occupancy() * integral.value / rect.area())
    }

    /// Factor of window `(i, j)` from the cached fixed rule used inside
    /// products.
    pub fn factor_window_cached(&self, s: f64, i: i64, j: i64) -> f64 {
        let mult = 1;
        let quad = self.build_window(i, j, mult);
        self.window_jet(&quad, s, 1).value()
    }

    /// Makes sure every window needed up to `s_max` is cached, so parallel
    /// callers only take read locks.
    pub fn prepare(&self, s_max: f64) {
        let (k, _) = self.rings_needed(s_max);
        self.ensure_rings(k);
    }
}

/// Gauss nodes on `[a, b]` for an integrand with singularities at `±i e`
/// on the imaginary axis. Panels are bisected until each is at most as wide
/// as its distance to the singularities; intervals straddling zero are
/// folded onto `[0, max(|a|, |b|)]` when symmetric.
fn symmetric_axis(a: f64, b: f64, e: f64, max_nodes: usize, coarse: bool) -> Vec<(f64, f64)> {
    if a < 0.0 && b > 0.0 && (a + b).abs() <= 1e-12 * (b - a) {
        return axis_panels(0.0, b, e, max_nodes, coarse)
            .into_iter()
            .map(|(x, w)| (x, 2.0 * w))
            .collect();
    }
    axis_panels(a, b, e, max_nodes, coarse)
}

fn axis_panels(a: f64, b: f64, e: f64, max_nodes: usize, coarse: bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let c = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let dist = (c * c + e * e).sqrt();
        if half > 0.5 * dist && depth < 24 {
            stack.push((c, hi, depth + 1));
            stack.push((lo, c, depth + 1));
            continue;
        }
        let n = nodes_for_ratio(half, dist, max_nodes);
        let n = if coarse {
            if n == 1 {
                2
            } else {
                n / 2
            }
        } else {
            n
        };
        for &(u, w) in gauss_legendre(n) {
            out.push((c + half * u, half * w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3(alpha: f64) -> NetworkConfig {
        NetworkConfig {
            lambda: 1e-3,
            mu: 2000.0,
            w: 250.0,
            l: 500.0,
            h: 250.0,
            alpha,
            pathloss_ref: 1000.0,
            ..Default::default()
        }
    }

    #[test]
    fn axis_weights_sum_to_length() {
        for (a, b, e) in [(-1000.0, 1000.0, 200.0), (1500.0, 2500.0, 250.0), (-50.0, 400.0, 10.0)] {
            for coarse in [false, true] {
                let nodes = symmetric_axis(a, b, e, 32, coarse);
                let total: f64 = nodes.iter().map(|p| p.1).sum();
                assert!((total - (b - a)).abs() < 1e-9 * (b - a));
            }
        }
    }

    #[test]
    fn zero_argument_is_one() {
        let ev = LaplaceEvaluator::new(&fig3(3.0), false).unwrap();
        let v = ev.evaluate(0.0).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.tail_bound, 0.0);
        assert_eq!(ev.factor_window(0.0, 3, 0).unwrap(), 1.0);
    }

    #[test]
    fn empty_network_is_one() {
        let cfg = NetworkConfig {
            lambda: 0.0,
            ..fig3(3.0)
        };
        let ev = LaplaceEvaluator::new(&cfg, false).unwrap();
        assert_eq!(ev.factor_window(1.0, 1, 0).unwrap(), 1.0);
        assert_eq!(ev.evaluate(5.0).unwrap().value, 1.0);
    }

    #[test]
    fn cached_and_adaptive_factors_agree() {
        let ev = LaplaceEvaluator::new(&fig3(2.5), false).unwrap();
        for &s in &[1e-3, 0.1, 1.0, 30.0] {
            for i in 0..4 {
                let a = ev.factor_window(s, i, 0).unwrap();
                let b = ev.factor_window_cached(s, i, 0);
                let (da, db) = (1.0 - a, 1.0 - b);
                assert!((da - db).abs() <= 1e-8 * da.max(1e-300), "s={s} i={i}: {da} {db}");
            }
        }
    }

    #[test]
    fn interference_dominates_shot_noise() {
        let cfg = fig3(3.0);
        let shot = LaplaceEvaluator::new(&cfg, false).unwrap();
        let intf = LaplaceEvaluator::new(&cfg, true).unwrap();
        for &s in &[0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0] {
            let a = shot.evaluate(s).unwrap().value;
            let b = intf.evaluate(s).unwrap().value;
            assert!(b >= a, "s={s}");
            assert!(a > 0.0 && b <= 1.0);
        }
    }

    #[test]
    fn truncation_is_sound() {
        let ev = LaplaceEvaluator::new(&fig3(2.5), true).unwrap();
        let s = 2.0;
        let mut prev = f64::INFINITY;
        for k in [1, 2, 4, 8, 16, 64] {
            let t = ev.tail_bound(s, k);
            assert!(t < prev);
            prev = t;
        }
        let full = ev.evaluate(s).unwrap();
        assert!(!full.capped);
        // Doubling the cap beyond what is needed changes nothing; forcing a
        // short product must stay within its own reported bound.
        for cap in [2usize, 8, 32] {
            let short = LaplaceEvaluator::with_options(
                ev.config(),
                true,
                ProductTruncation {
                    k_max_cap: cap,
                    ..Default::default()
                },
                QuadratureSpec::default(),
            )
            .unwrap()
            .evaluate(s)
            .unwrap();
            assert!(short.capped);
            assert!(short.value >= full.value);
            assert!(short.value - full.value <= short.tail_bound, "cap {cap}");
        }
    }

    #[test]
    fn lattice_rings_have_right_multiplicity() {
        let cfg = NetworkConfig {
            mode: Mode::Lattice,
            nu: Some(600.0),
            l: 500.0,
            ..fig3(4.0)
        };
        let ev = LaplaceEvaluator::new(&cfg, true).unwrap();
        for k in 0..5usize {
            let total: u32 = ev.ring_members(k).iter().map(|m| m.2).sum();
            assert_eq!(total as usize, if k == 0 { 1 } else { 8 * k });
        }
    }
}
