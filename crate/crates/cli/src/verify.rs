//! Agreement and invariant suite over a directory of config documents.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use uav_harvest::analytic::{
    coverage_integral, laplace_interference, laplace_interference_plus_noise, laplace_shot_noise,
    AnalyticOptions, AnalyticValue, LaplaceEvaluator,
};
use uav_harvest::model::{load_config, NetworkConfig};
use uav_harvest::sim::{coverage_estimate, empirical_laplace, harvest_passage_estimate, Scenario, SimEstimate};
use uav_harvest::transport::check_identity_analytic;
use uav_harvest::ModulationRule;

use crate::experiments::RunError;
use crate::output::{fmt_f64, McCell};
use crate::spec::VERIFY_SIGMAS;

pub const DEFAULT_VERIFY_TRIALS: u64 = 10_000;
const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub config: String,
    pub check: String,
    pub analytic: Option<AnalyticValue>,
    pub mc: Option<McCell>,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record([
            "config", "check", "analytic", "analytic_err", "mc_mean", "mc_se", "trials", "seed", "status",
            "detail",
        ])
        .expect("writing to memory");
        for c in &self.checks {
            let mut rec = vec![c.config.clone(), c.check.clone()];
            match c.analytic {
                Some(a) => rec.extend([fmt_f64(a.value), fmt_f64(a.error)]),
                None => rec.extend([String::new(), String::new()]),
            }
            match &c.mc {
                Some(m) => rec.extend([
                    fmt_f64(m.mean),
                    fmt_f64(m.std_error),
                    m.trials.to_string(),
                    m.seed.to_string(),
                ]),
                None => rec.extend(std::iter::repeat_n(String::new(), 4)),
            }
            rec.push(if c.passed { "pass" } else { "fail" }.into());
            rec.push(c.detail.clone());
            w.write_record(&rec).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
    }
}

/// Config documents in `dir` (`*.toml`), sorted by file name.
pub fn config_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    Ok(files)
}

struct Suite<'a> {
    name: &'a str,
    out: Vec<CheckResult>,
}

impl Suite<'_> {
    fn record(&mut self, check: &str, analytic: Option<AnalyticValue>, mc: Option<&SimEstimate>, passed: bool, detail: String) {
        self.out.push(CheckResult {
            config: self.name.to_string(),
            check: check.to_string(),
            analytic,
            mc: mc.map(McCell::from),
            passed,
            detail,
        });
    }

    /// Agreement within [`VERIFY_SIGMAS`] standard errors, for a metric
    /// bounded in `[0, upper]`. The SE is floored by the largest standard
    /// deviation a variable with that range and the analytic mean can
    /// have, which keeps small runs with all-equal samples meaningful.
    fn agree(&mut self, check: &str, a: AnalyticValue, mc: &SimEstimate, upper: f64) {
        let p = a.value.clamp(0.0, upper);
        let floor = (p * (upper - p) / mc.trials.max(1) as f64).sqrt();
        let se = mc.std_error.max(floor);
        let gap = ((a.value - mc.mean).abs() - a.error).max(0.0);
        let z = if gap == 0.0 { 0.0 } else { gap / se };
        self.record(check, Some(a), Some(mc), z <= VERIFY_SIGMAS, format!("z = {z:.2}"));
    }
}

fn laplace_at(ev: &LaplaceEvaluator, s: f64, exclude: bool) -> Result<AnalyticValue, RunError> {
    let v = if exclude {
        laplace_interference(ev, s)?
    } else {
        laplace_shot_noise(ev, s)?
    };
    Ok(AnalyticValue {
        value: v.value,
        error: v.error(),
    })
}

fn run_config(name: &str, cfg: &NetworkConfig, seed: u64, trials: u64) -> Result<Vec<CheckResult>, RunError> {
    let mut suite = Suite {
        name,
        out: Vec::new(),
    };
    suite.record("validate", None, None, true, String::new());

    let shot_ev = LaplaceEvaluator::new(cfg, false)?;
    let intf_ev = LaplaceEvaluator::new(cfg, true)?;
    let noise = cfg.noise.max(1e-13);
    let at_zero = [
        laplace_shot_noise(&shot_ev, 0.0)?.value,
        laplace_interference(&intf_ev, 0.0)?.value,
        laplace_interference_plus_noise(&intf_ev, 0.0, noise)?.value,
        laplace_interference_plus_noise(&shot_ev, 0.0, noise)?.value,
    ];
    let dev = at_zero.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    suite.record(
        "normalization",
        Some(AnalyticValue { value: dev, error: 0.0 }),
        None,
        dev <= NORMALIZATION_TOL,
        format!("max |L(0) - 1| over shot, interference and noise variants <= {NORMALIZATION_TOL:e}"),
    );

    let sc = Scenario::new(cfg, seed)?;
    let s_max = sc.coverage_s_max();
    let s_center = s_max * (cfg.h * cfg.h / (0.25 * cfg.w * cfg.w + 0.25 * cfg.l * cfg.l + cfg.h * cfg.h))
        .powf(0.5 * cfg.alpha);
    let grid = [s_center, s_max];
    let shot_mc = empirical_laplace(&sc, &grid, trials, false);
    let intf_mc = empirical_laplace(&sc, &grid, trials, true);
    for (k, label) in ["center", "corner"].iter().enumerate() {
        let a = laplace_at(&shot_ev, grid[k], false)?;
        suite.agree(&format!("laplace_shot_noise_{label}"), a, &shot_mc[k], 1.0);
        let a = laplace_at(&intf_ev, grid[k], true)?;
        suite.agree(&format!("laplace_interference_{label}"), a, &intf_mc[k], 1.0);
    }

    let ci = coverage_integral(cfg, &AnalyticOptions::default())?;
    let cov = ci.coverage();
    let cov_mc = coverage_estimate(&sc, trials);
    suite.agree("coverage", cov, &cov_mc, 1.0);
    suite.record(
        "occupancy_bound",
        Some(cov),
        None,
        cov.value <= ci.occupancy + cov.error,
        format!("coverage <= 1 - exp(-lambda w l) = {}", fmt_f64(ci.occupancy)),
    );

    let modulation = ModulationRule::FloorLog2;
    let bits = modulation.bits(cfg.tau);
    let rate = ci.rate(bits);
    let gap = (rate.value - bits * cov.value).abs();
    suite.record(
        "rate_identity",
        Some(rate),
        None,
        gap <= 1e-12 * rate.value.abs().max(1.0),
        format!("rate = log2(M) coverage with log2(M) = {bits}"),
    );

    // 1000 slots per passage; the slot grid then misses at most 0.1% of
    // the window
    let ts = cfg.w / (1000.0 * cfg.v);
    let passages = (trials / 10).max(trials.min(100));
    let d = ci.harvested(bits);
    let d_mc = harvest_passage_estimate(&sc, ts, modulation, passages);
    let slots = 2.0 * (0.5 * cfg.w / (cfg.v * ts) + 1e-9).floor() + 1.0;
    let d_slot = AnalyticValue {
        value: d.value,
        error: d.error + d.value * (cfg.w - (slots - 1.0) * cfg.v * ts).abs() / cfg.w,
    };
    suite.agree("harvested_data", d_slot, &d_mc, slots * ts * bits);

    let t = check_identity_analytic(cfg, modulation)?;
    suite.record(
        "transport_ratio",
        Some(AnalyticValue {
            value: t.ratio,
            error: t.ratio_error,
        }),
        None,
        (t.ratio - 1.0).abs() <= t.ratio_error + 1e-12,
        "D K / (R T) = 1".into(),
    );
    Ok(suite.out)
}

/// Runs the suite on every config in `dir`. A config that fails to load
/// or validate is reported as a failed `validate` check.
pub fn verify_all(dir: &Path, seed: u64, trials: u64) -> Result<VerifyReport, RunError> {
    let mut checks = Vec::new();
    for path in config_files(dir)? {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let loaded = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| load_config(&text).map_err(|e| e.to_string()));
        match loaded {
            Ok(cfg) => match run_config(&name, &cfg, seed, trials) {
                Ok(mut c) => checks.append(&mut c),
                Err(e) => checks.push(CheckResult {
                    config: name,
                    check: "evaluate".into(),
                    analytic: None,
                    mc: None,
                    passed: false,
                    detail: e.to_string(),
                }),
            },
            Err(e) => checks.push(CheckResult {
                config: name,
                check: "validate".into(),
                analytic: None,
                mc: None,
                passed: false,
                detail: e,
            }),
        }
    }
    Ok(VerifyReport { checks })
}

#[derive(Debug, Clone, Serialize)]
struct VerifyManifest<'a> {
    tool: &'static str,
    version: &'static str,
    config_dir: &'a Path,
    seed: u64,
    trials: u64,
    configs: Vec<String>,
    passed: bool,
    wall_time_s: f64,
}

/// Runs the suite and writes `verify_all.csv` and `manifest.json` to `out`.
pub fn verify_all_to(dir: &Path, seed: u64, trials: u64, out: &Path) -> Result<VerifyReport, RunError> {
    let start = Instant::now();
    let report = verify_all(dir, seed, trials)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("verify_all.csv"), report.to_csv_string())?;
    let mut configs: Vec<String> = report.checks.iter().map(|c| c.config.clone()).collect();
    configs.dedup();
    let manifest = VerifyManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_dir: dir,
        seed,
        trials,
        configs,
        passed: report.passed(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    fs::write(out.join("manifest.json"), json + "\n")?;
    Ok(report)
}
