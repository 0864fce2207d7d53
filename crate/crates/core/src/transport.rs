//! Mass-transport check between UAV-side rate and device-side harvested
//! data: `D K / (R T) = 1` with `K = λwl` devices per window and `T = w/v`
//! seconds in a window.

use serde::{Deserialize, Serialize};

use crate::analytic::{coverage_integral, AnalyticError, AnalyticOptions};
use crate::model::ModulationRule;
use crate::sim::{coverage_estimate, harvest_passage_estimate, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    /// Harvested data per passage (bits/Hz).
    pub harvested: f64,
    /// Error budget (analytic) or standard error (simulated) of `harvested`.
    pub harvested_error: f64,
    /// Mean rate at the typical UAV (bits/s/Hz).
    pub rate: f64,
    pub rate_error: f64,
    /// `K = λ w l`.
    pub devices_per_window: f64,
    /// `T = w / v`.
    pub window_time: f64,
    /// `D K / (R T)`.
    pub ratio: f64,
    pub ratio_error: f64,
    /// `1 - e^{-λwl}`.
    pub occupancy: f64,
    /// Time per passage during which the device could be served; the time
    /// outside the window contributes nothing.
    pub active_time: f64,
}

fn ratio_with_error(d: f64, de: f64, r: f64, re: f64, k: f64, t: f64) -> (f64, f64) {
    let ratio = d * k / (r * t);
    let rel = ((de / d).powi(2) + (re / r).powi(2)).sqrt();
    (ratio, ratio.abs() * rel)
}

/// Both metrics from the one shared coverage integral.
pub fn check_identity_analytic(
    cfg: &crate::NetworkConfig,
    modulation: ModulationRule,
) -> Result<TransportReport, AnalyticError> {
    let ci = coverage_integral(cfg, &AnalyticOptions::default())?;
    let bits = modulation.bits(cfg.tau);
    let d = ci.harvested(bits);
    let r = ci.rate(bits);
    let k = ci.devices_per_window;
    let t = ci.window_time;
    // the error budgets are fully correlated (same integral), so they add
    let ratio = d.value * k / (r.value * t);
    let ratio_error = ratio.abs() * (d.error / d.value + r.error / r.value);
    Ok(TransportReport {
        harvested: d.value,
        harvested_error: d.error,
        rate: r.value,
        rate_error: r.error,
        devices_per_window: k,
        window_time: t,
        ratio,
        ratio_error,
        occupancy: ci.occupancy,
        active_time: t,
    })
}

/// Rate from simulated slots, harvested data from simulated passages with
/// an independent seed.
pub fn check_identity_simulated(
    sc: &Scenario,
    modulation: ModulationRule,
    trials: u64,
    slot_duration: f64,
) -> TransportReport {
    let cfg = &sc.cfg;
    let bits = modulation.bits(cfg.tau);
    let cov = coverage_estimate(sc, trials);
    let passage_sc = sc.clone().with_seed(sc.seed.wrapping_add(1));
    let d = harvest_passage_estimate(&passage_sc, slot_duration, modulation, trials);
    let k = cfg.mean_devices_per_window();
    let t = cfg.w / cfg.v;
    let (r, re) = (bits * cov.mean, bits * cov.std_error);
    let (ratio, ratio_error) = ratio_with_error(d.mean, d.std_error, r, re, k, t);
    let slots = 2 * (0.5 * cfg.w / (cfg.v * slot_duration) + 1e-9).floor() as u64 + 1;
    TransportReport {
        harvested: d.mean,
        harvested_error: d.std_error,
        rate: r,
        rate_error: re,
        devices_per_window: k,
        window_time: t,
        ratio,
        ratio_error,
        occupancy: cfg.occupancy(),
        active_time: slots as f64 * slot_duration,
    }
}
