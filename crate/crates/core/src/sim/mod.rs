//! Monte Carlo simulator of the UAV/IoT geometry.
//!
//! Each window's draw (device count, selected device position, fading gain)
//! comes from its own keyed stream, so results are reproducible bit for bit
//! and independent of thread count. Only the selected device of each window
//! is placed: given the count, it is uniform in the window.

mod passage;
pub mod rng;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::LaplaceEvaluator;
use crate::model::{ConfigError, Mode, NetworkConfig};
use crate::stats::MeanAccumulator;
use rng::{window_stream, Purpose, TrialKey, TRIAL_STREAM};

pub use passage::{harvest_curve, harvest_passage_estimate, simulate_passage, Passage, PassageSlot};

/// Trials per reduction chunk. Fixed so that sums do not depend on the
/// number of threads.
const CHUNK: u64 = 1024;

/// Trial counts below this get a note on the estimate.
pub const MIN_TRIALS: u64 = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub cfg: NetworkConfig,
    pub seed: u64,
    /// Windows simulated on each side (ring radius in 2-D).
    pub k_sim: usize,
}

impl Scenario {
    pub fn new(cfg: &NetworkConfig, seed: u64) -> Result<Self, ConfigError> {
        cfg.validate()?;
        Ok(Scenario {
            cfg: cfg.clone(),
            seed,
            k_sim: Self::default_k_sim(cfg.mode),
        })
    }

    pub fn default_k_sim(mode: Mode) -> usize {
        match mode {
            Mode::Strip => 64,
            Mode::Lattice => 16,
        }
    }

    pub fn with_k_sim(mut self, k_sim: usize) -> Self {
        self.k_sim = k_sim;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn lattice(&self) -> bool {
        self.cfg.mode == Mode::Lattice
    }

    /// Bound on the Laplace-transform mass at argument `s` carried by the
    /// windows beyond `k_sim`, i.e. the simulator's edge bias.
    pub fn edge_bias(&self, s: f64) -> f64 {
        match LaplaceEvaluator::new(&self.cfg, true) {
            Ok(ev) => ev.tail_bound(s, self.k_sim),
            Err(_) => f64::NAN,
        }
    }

    /// `s` at the corner of the serving window, the largest coverage uses.
    pub fn coverage_s_max(&self) -> f64 {
        let c = &self.cfg;
        let d2 = (0.25 * c.w * c.w + 0.25 * c.l * c.l + c.h * c.h) / (c.pathloss_ref * c.pathloss_ref);
        c.tau * c.m as f64 * d2.powf(0.5 * c.alpha) / (c.p * c.omega)
    }

    fn for_each_window(&self, mut f: impl FnMut(i64, i64)) {
        let k = self.k_sim as i64;
        if self.lattice() {
            for i in -k..=k {
                for j in -k..=k {
                    f(i, j);
                }
            }
        } else {
            for i in -k..=k {
                f(i, 0);
            }
        }
    }
}

/// One window's contribution in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowDraw {
    pub i: i64,
    pub j: i64,
    pub count: u64,
    /// Ground position of the selected device, if the window is nonempty.
    pub device: Option<(f64, f64)>,
    pub gain: f64,
    /// Received power at the typical UAV (zero when empty).
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSample {
    pub windows: Vec<WindowDraw>,
    /// Power from the typical UAV's own window, if nonempty.
    pub signal: Option<f64>,
    /// Power summed over all other windows.
    pub interference: f64,
}

impl SlotSample {
    pub fn shot_noise(&self) -> f64 {
        self.interference + self.signal.unwrap_or(0.0)
    }

    pub fn sinr(&self, noise: f64) -> Option<f64> {
        self.signal.map(|s| s / (self.interference + noise))
    }
}

/// Randomness of one window: count, uniform offsets in `[-1/2, 1/2]²`,
/// fading gain.
pub(crate) fn window_randomness(cfg: &NetworkConfig, key: &TrialKey, stream: u64) -> (u64, f64, f64, f64) {
    let mut rng = key.stream(stream);
    let mean = cfg.mean_devices_per_window();
    let count = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64
    } else {
        0
    };
    if count == 0 {
        return (0, 0.0, 0.0, 0.0);
    }
    let u: f64 = rng.random::<f64>() - 0.5;
    let v: f64 = rng.random::<f64>() - 0.5;
    let gain = cfg.fading().sample(&mut rng);
    (count, u, v, gain)
}

/// Draws every window of one slot. `shift` moves the whole fleet (and the
/// receiving UAV with it) by `(dx, dy)`.
fn draw_slot(
    sc: &Scenario,
    key: &TrialKey,
    shift: (f64, f64),
    mut visit: impl FnMut(WindowDraw),
) {
    let c = &sc.cfg;
    let nu = if sc.lattice() { c.row_spacing() } else { 0.0 };
    sc.for_each_window(|i, j| {
        let (count, u, v, gain) = window_randomness(c, key, window_stream(0, i, j));
        let mut draw = WindowDraw {
            i,
            j,
            count,
            device: None,
            gain,
            power: 0.0,
        };
        if count > 0 {
            let x = i as f64 * c.mu + shift.0 + u * c.w;
            let y = j as f64 * nu + shift.1 + v * c.l;
            let (dx, dy) = (x - shift.0, y - shift.1);
            let d = (dx * dx + dy * dy + c.h * c.h).sqrt();
            draw.device = Some((x, y));
            draw.power = c.p * gain * c.path_gain(d);
        }
        visit(draw);
    });
}

fn slot_powers(sc: &Scenario, key: &TrialKey, shift: (f64, f64)) -> (Option<f64>, f64) {
    let mut signal = None;
    let mut interference = 0.0;
    draw_slot(sc, key, shift, |d| {
        if d.i == 0 && d.j == 0 {
            if d.count > 0 {
                signal = Some(d.power);
            }
        } else {
            interference += d.power;
        }
    });
    (signal, interference)
}

fn collect_slot(sc: &Scenario, key: &TrialKey, shift: (f64, f64)) -> SlotSample {
    let mut windows = Vec::new();
    draw_slot(sc, key, shift, |d| windows.push(d));
    let signal = windows
        .iter()
        .find(|d| d.i == 0 && d.j == 0 && d.count > 0)
        .map(|d| d.power);
    let interference = windows
        .iter()
        .filter(|d| d.i != 0 || d.j != 0)
        .map(|d| d.power)
        .sum();
    SlotSample {
        windows,
        signal,
        interference,
    }
}

/// Palm-frame slot: the typical UAV above the origin, windows at `iµ`.
pub fn sample_slot(sc: &Scenario, trial: u64) -> SlotSample {
    collect_slot(sc, &TrialKey::new(sc.seed, Purpose::Slot, trial), (0.0, 0.0))
}

/// Stationary snapshot at time `t`: the fleet shifted by a uniform
/// `U ~ [-µ/2, µ/2]` (and `V ~ [-ν/2, ν/2]` in 2-D) plus `v t`. Powers are
/// measured at UAV 0, now at `(U + v t, V)`.
pub fn sample_snapshot_stationary(sc: &Scenario, t: f64, trial: u64) -> SlotSample {
    let key = TrialKey::new(sc.seed, Purpose::Snapshot, trial);
    let mut rng = key.stream(TRIAL_STREAM);
    let u = (rng.random::<f64>() - 0.5) * sc.cfg.mu;
    let v = if sc.lattice() {
        (rng.random::<f64>() - 0.5) * sc.cfg.row_spacing()
    } else {
        0.0
    };
    sample_snapshot_shifted(sc, t, (u, v), trial)
}

/// Snapshot with a given shift; `(0, 0)` at `t = 0` reproduces
/// [`sample_slot`] for the same trial.
pub fn sample_snapshot_shifted(sc: &Scenario, t: f64, shift: (f64, f64), trial: u64) -> SlotSample {
    let key = TrialKey::new(sc.seed, Purpose::Slot, trial);
    collect_slot(sc, &key, (shift.0 + sc.cfg.v * t, shift.1))
}

/// Monte Carlo point estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub metric: String,
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
    /// Normal-approximation 95% interval.
    pub ci95: (f64, f64),
    pub notes: Vec<String>,
}

impl SimEstimate {
    fn new(metric: String, acc: &MeanAccumulator, seed: u64, notes: Vec<String>) -> Self {
        let mean = acc.mean();
        let se = acc.std_error();
        SimEstimate {
            metric,
            mean,
            std_error: se,
            trials: acc.n,
            seed,
            ci95: (mean - 1.96 * se, mean + 1.96 * se),
            notes,
        }
    }

    /// Scales mean, error and interval by `c` (e.g. bits per symbol).
    pub fn scaled(&self, metric: &str, c: f64) -> SimEstimate {
        SimEstimate {
            metric: metric.to_string(),
            mean: c * self.mean,
            std_error: c.abs() * self.std_error,
            ci95: (c * self.ci95.0, c * self.ci95.1),
            ..self.clone()
        }
    }

    /// `|x - mean|` in standard errors (infinite when the SE is zero and
    /// the values differ).
    pub fn z_score(&self, x: f64) -> f64 {
        let d = (x - self.mean).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Runs `trials` trials, each filling one value per metric, and reduces in
/// fixed-size chunks in index order.
pub(crate) fn run_trials<F>(trials: u64, width: usize, f: F) -> Vec<MeanAccumulator>
where
    F: Fn(u64, &mut [f64]) + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Vec<MeanAccumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![MeanAccumulator::default(); width];
            let mut buf = vec![0.0; width];
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                f(t, &mut buf);
                for (a, &x) in acc.iter_mut().zip(&buf) {
                    a.push(x);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![MeanAccumulator::default(); width];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total
}

fn base_notes(sc: &Scenario, trials: u64, s: f64) -> Vec<String> {
    let mut notes = Vec::new();
    if trials < MIN_TRIALS {
        notes.push(format!("only {trials} trials (< {MIN_TRIALS})"));
    }
    let bias = sc.edge_bias(s);
    if bias > 1e-3 {
        notes.push(format!(
            "interference truncated at k_sim = {}; neglected-window bound {bias:.2e}",
            sc.k_sim
        ));
    }
    notes
}

/// Mean of `exp(-s N)` over slots for each `s`, where `N` is the shot-noise
/// (own window included) or the interference (`exclude_center`).
pub fn empirical_laplace(
    sc: &Scenario,
    s_grid: &[f64],
    trials: u64,
    exclude_center: bool,
) -> Vec<SimEstimate> {
    let accs = run_trials(trials, s_grid.len(), |t, out| {
        let key = TrialKey::new(sc.seed, Purpose::Slot, t);
        let (signal, interference) = slot_powers(sc, &key, (0.0, 0.0));
        let n = if exclude_center {
            interference
        } else {
            interference + signal.unwrap_or(0.0)
        };
        for (o, &s) in out.iter_mut().zip(s_grid) {
            *o = if s == 0.0 { 1.0 } else { (-s * n).exp() };
        }
    });
    let name = if exclude_center { "laplace_interference" } else { "laplace_shot_noise" };
    s_grid
        .iter()
        .zip(&accs)
        .map(|(&s, acc)| SimEstimate::new(format!("{name}(s={s:e})"), acc, sc.seed, base_notes(sc, trials, s)))
        .collect()
}

/// Coverage `P(W_0 nonempty and SINR >= τ)` for each threshold, from the
/// same slots.
pub fn coverage_curve(sc: &Scenario, taus: &[f64], trials: u64) -> Vec<SimEstimate> {
    coverage_curves(sc, taus, &[sc.cfg.noise], trials).remove(0)
}

/// Coverage curves for several noise powers, all from the same slots
/// (e.g. SINR next to SIR). Indexed `[noise][tau]`.
pub fn coverage_curves(
    sc: &Scenario,
    taus: &[f64],
    noises: &[f64],
    trials: u64,
) -> Vec<Vec<SimEstimate>> {
    let width = taus.len();
    let accs = run_trials(trials, width * noises.len(), |t, out| {
        let key = TrialKey::new(sc.seed, Purpose::Slot, t);
        let (signal, interference) = slot_powers(sc, &key, (0.0, 0.0));
        for (row, &noise) in out.chunks_mut(width).zip(noises) {
            for (o, &tau) in row.iter_mut().zip(taus) {
                *o = match signal {
                    Some(p) if p >= tau * (interference + noise) => 1.0,
                    _ => 0.0,
                };
            }
        }
    });
    accs.chunks(width)
        .zip(noises)
        .map(|(row, &noise)| {
            taus.iter()
                .zip(row)
                .map(|(&tau, acc)| {
                    let cfg = NetworkConfig {
                        noise,
                        ..sc.cfg.with_tau(tau)
                    };
                    let sc_tau = Scenario { cfg, ..sc.clone() };
                    let notes = base_notes(&sc_tau, trials, sc_tau.coverage_s_max());
                    SimEstimate::new(format!("coverage(tau={tau:e})"), acc, sc.seed, notes)
                })
                .collect()
        })
        .collect()
}

/// Coverage at the configured threshold.
pub fn coverage_estimate(sc: &Scenario, trials: u64) -> SimEstimate {
    let mut est = coverage_curve(sc, &[sc.cfg.tau], trials).remove(0);
    est.metric = "coverage".into();
    est
}

/// Fraction of slots whose own window is nonempty.
pub fn occupancy_estimate(sc: &Scenario, trials: u64) -> SimEstimate {
    let accs = run_trials(trials, 1, |t, out| {
        let key = TrialKey::new(sc.seed, Purpose::Slot, t);
        let (count, ..) = window_randomness(&sc.cfg, &key, window_stream(0, 0, 0));
        out[0] = if count > 0 { 1.0 } else { 0.0 };
    });
    SimEstimate::new("occupancy".into(), &accs[0], sc.seed, Vec::new())
}
