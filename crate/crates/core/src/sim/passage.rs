//! Time-stepped harvesting over one UAV passage.
//!
//! A typical device sits at `(0, Y)` with `Y` uniform across the strip. The
//! serving UAV passes overhead; in each slot while the device is inside its
//! window the window holds a fresh Poisson background plus the typical
//! device, one of them is picked uniformly, and a picked typical device
//! uploads `T_s log2 M` bits if its SINR clears the threshold. Interference
//! comes from the other windows in the serving UAV's frame.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::rng::{window_stream, Purpose, TrialKey, TRIAL_STREAM};
use super::{base_notes, run_trials, window_randomness, Scenario, SimEstimate};
use crate::model::ModulationRule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassageSlot {
    pub slot: i64,
    /// Along-track offset of the device from the serving UAV.
    pub offset: f64,
    /// Background devices sharing the window with the typical device.
    pub background: u64,
    pub selected: bool,
    /// SINR of the typical device when it was selected.
    pub sinr: Option<f64>,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub y: f64,
    pub slots: Vec<PassageSlot>,
    /// Bits per hertz uploaded during the passage.
    pub data: f64,
}

/// Slots whose offset `k v T_s` lies inside the window.
fn slot_range(sc: &Scenario, ts: f64) -> i64 {
    (0.5 * sc.cfg.w / (sc.cfg.v * ts) + 1e-9).floor() as i64
}

fn interference(sc: &Scenario, key: &TrialKey, slot: i64) -> f64 {
    let c = &sc.cfg;
    let nu = if sc.lattice() { c.row_spacing() } else { 0.0 };
    let mut total = 0.0;
    sc.for_each_window(|i, j| {
        if i == 0 && j == 0 {
            return;
        }
        let (count, u, v, gain) = window_randomness(c, key, window_stream(slot, i, j));
        if count > 0 {
            let x = i as f64 * c.mu + u * c.w;
            let y = j as f64 * nu + v * c.l;
            let d = (x * x + y * y + c.h * c.h).sqrt();
            total += c.p * gain * c.path_gain(d);
        }
    });
    total
}

/// Runs one passage and returns the device offset `Y` and the SINR of every
/// slot in which the typical device was selected.
fn run_passage(
    sc: &Scenario,
    ts: f64,
    trial: u64,
    mut record: Option<&mut Vec<PassageSlot>>,
) -> (f64, Vec<f64>) {
    let c = &sc.cfg;
    let key = TrialKey::new(sc.seed, Purpose::Passage, trial);
    let y = (key.stream(TRIAL_STREAM).random::<f64>() - 0.5) * c.l;
    let k = slot_range(sc, ts);
    let mean = c.mean_devices_per_window();
    let background = (mean > 0.0).then(|| Poisson::new(mean).expect("positive mean"));
    let fading = c.fading();
    let mut sinrs = Vec::new();
    for slot in -k..=k {
        let offset = slot as f64 * c.v * ts;
        let mut rng = key.stream(window_stream(slot, 0, 0));
        let n = background.as_ref().map_or(0, |p| p.sample(&mut rng) as u64);
        let selected = rng.random::<f64>() * ((n + 1) as f64) < 1.0;
        let mut sinr = None;
        if selected {
            let gain = fading.sample(&mut rng);
            let d = (offset * offset + y * y + c.h * c.h).sqrt();
            let signal = c.p * gain * c.path_gain(d);
            let s = signal / (interference(sc, &key, slot) + c.noise);
            sinrs.push(s);
            sinr = Some(s);
        }
        if let Some(out) = record.as_deref_mut() {
            out.push(PassageSlot {
                slot,
                offset,
                background: n,
                selected,
                sinr,
                covered: sinr.is_some_and(|s| s >= c.tau),
            });
        }
    }
    (y, sinrs)
}

fn passage_data(sinrs: &[f64], tau: f64, ts: f64, bits: f64) -> f64 {
    sinrs.iter().filter(|&&s| s >= tau).count() as f64 * ts * bits
}

/// One full passage with per-slot records.
pub fn simulate_passage(sc: &Scenario, ts: f64, modulation: ModulationRule, trial: u64) -> Passage {
    let mut slots = Vec::new();
    let (y, sinrs) = run_passage(sc, ts, trial, Some(&mut slots));
    let tau = sc.cfg.tau;
    let data = passage_data(&sinrs, tau, ts, modulation.bits(tau));
    Passage { y, slots, data }
}

/// Mean bits per hertz harvested from the typical device per passage.
pub fn harvest_passage_estimate(
    sc: &Scenario,
    ts: f64,
    modulation: ModulationRule,
    trials: u64,
) -> SimEstimate {
    let mut est = harvest_curve(sc, ts, modulation, &[sc.cfg.tau], trials).remove(0);
    est.metric = "harvested_data".into();
    est
}

/// Harvested data for each threshold, evaluated on the same passages.
pub fn harvest_curve(
    sc: &Scenario,
    ts: f64,
    modulation: ModulationRule,
    taus: &[f64],
    trials: u64,
) -> Vec<SimEstimate> {
    assert!(ts > 0.0, "slot duration must be positive");
    let bits: Vec<f64> = taus.iter().map(|&t| modulation.bits(t)).collect();
    let accs = run_trials(trials, taus.len(), |t, out| {
        let (_, sinrs) = run_passage(sc, ts, t, None);
        for ((o, &tau), &b) in out.iter_mut().zip(taus).zip(&bits) {
            *o = passage_data(&sinrs, tau, ts, b);
        }
    });
    taus.iter()
        .zip(&accs)
        .map(|(&tau, acc)| {
            let sc_tau = Scenario {
                cfg: sc.cfg.with_tau(tau),
                ..sc.clone()
            };
            let mut notes = base_notes(&sc_tau, trials, sc_tau.coverage_s_max());
            if sc.cfg.v * ts > sc.cfg.w / 10.0 {
                notes.push(format!(
                    "v T_s = {} m exceeds w/10; slot discretization is coarse",
                    sc.cfg.v * ts
                ));
            }
            SimEstimate::new(format!("harvested_data(tau={tau:e})"), acc, sc.seed, notes)
        })
        .collect()
}
