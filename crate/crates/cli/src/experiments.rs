//! Turns a resolved plan into tables of analytic values next to their
//! Monte Carlo estimates.

use std::collections::BTreeSet;

use thiserror::Error;
use uav_harvest::analytic::{
    coverage_probability, laplace_interference, laplace_interference_plus_noise, laplace_shot_noise,
    mean_rate, harvested_data, AnalyticError, AnalyticValue, LaplaceEvaluator,
};
use uav_harvest::model::{ConfigDocument, ConfigError};
use uav_harvest::optimize::{objective, optimize_window_with, DEFAULT_GRID_POINTS};
use uav_harvest::sim::{
    coverage_curve, coverage_curves, coverage_estimate, empirical_laplace, harvest_curve, Scenario, SimEstimate,
};
use uav_harvest::transport::{check_identity_analytic, check_identity_simulated};
use uav_harvest::{ModulationRule, NetworkConfig};

use crate::output::{fmt_f64, Row, Table};
use crate::presets::Kind;
use crate::spec::{Sweep, SpecError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

/// A fully resolved experiment.
#[derive(Debug, Clone)]
pub struct Plan {
    pub kind: Kind,
    pub document: ConfigDocument,
    pub sweeps: Vec<Sweep>,
    pub seed: u64,
    pub trials: u64,
    pub modulation: ModulationRule,
    pub slot_duration: f64,
    pub optimizer_grid: usize,
    /// Windows simulated on each side of the serving one.
    pub k_sim: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub configs: Vec<NetworkConfig>,
    pub notes: Vec<String>,
}

fn inner_axis(kind: Kind) -> Option<&'static str> {
    match kind {
        Kind::Laplace => Some("s"),
        Kind::Coverage | Kind::Rate | Kind::Harvest | Kind::Sinr => Some("tau"),
        Kind::Optimize => Some("w"),
        Kind::Transport => None,
    }
}

fn default_inner(kind: Kind, cfg: &NetworkConfig) -> Vec<f64> {
    match kind {
        Kind::Laplace => {
            // around the inverse of the strongest mean received power
            let s_ref = 1.0 / (cfg.p * cfg.omega * cfg.path_gain(cfg.h));
            (0..20).map(|k| s_ref * 10f64.powf(-3.0 + 4.0 * k as f64 / 19.0)).collect()
        }
        Kind::Optimize => (1..=DEFAULT_GRID_POINTS)
            .map(|k| cfg.mu * k as f64 / DEFAULT_GRID_POINTS as f64)
            .collect(),
        _ => (0..7).map(|k| 10f64.powf(-1.0 + 0.5 * k as f64)).collect(),
    }
}

fn format_value(name: &str, x: f64) -> String {
    if name == "m" {
        format!("{}", x.round() as u64)
    } else {
        fmt_f64(x)
    }
}

/// All combinations of the outer sweeps, first sweep slowest.
fn outer_points(sweeps: &[&Sweep]) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for s in sweeps {
        points = points
            .into_iter()
            .flat_map(|p| {
                s.grid.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    points
}

struct Collector {
    tables: Vec<Table>,
    notes: BTreeSet<String>,
}

impl Collector {
    fn table(&mut self, metric: &str, params: &[String]) -> &mut Table {
        if let Some(k) = self.tables.iter().position(|t| t.metric == metric) {
            return &mut self.tables[k];
        }
        self.tables.push(Table::new(metric, params.to_vec()));
        self.tables.last_mut().unwrap()
    }

    fn push(
        &mut self,
        metric: &str,
        names: &[String],
        params: Vec<String>,
        analytic: Option<AnalyticValue>,
        mc: Option<&SimEstimate>,
        upper: Option<f64>,
    ) {
        if let Some(e) = mc {
            for n in &e.notes {
                self.notes.insert(format!("{metric}: {n}"));
            }
        }
        let mut row = Row::new(params, analytic, mc);
        row.upper = upper;
        self.table(metric, names).rows.push(row);
    }
}

fn with_param(prefix: &[String], x: String) -> Vec<String> {
    let mut v = prefix.to_vec();
    v.push(x);
    v
}

fn laplace_value(v: uav_harvest::analytic::LaplaceValue) -> AnalyticValue {
    AnalyticValue {
        value: v.value,
        error: v.error(),
    }
}

pub fn run_plan(plan: &Plan) -> Result<Outcome, RunError> {
    let inner = inner_axis(plan.kind);
    let outer: Vec<&Sweep> = plan
        .sweeps
        .iter()
        .filter(|s| Some(s.name.as_str()) != inner)
        .collect();
    if let Some(bad) = outer.iter().find(|s| s.name == "s") {
        return Err(SpecError::BadGrid {
            name: bad.name.clone(),
            reason: "only laplace experiments sweep s".into(),
        }
        .into());
    }
    let user_inner = plan.sweeps.iter().find(|s| Some(s.name.as_str()) == inner);
    let names: Vec<String> = outer.iter().map(|s| s.name.clone()).collect();
    let mut out = Collector {
        tables: Vec::new(),
        notes: BTreeSet::new(),
    };
    let mut configs = Vec::new();
    for point in outer_points(&outer) {
        let mut doc = plan.document.clone();
        for (s, &x) in outer.iter().zip(&point) {
            doc.set(&s.name, &format_value(&s.name, x));
        }
        let cfg = doc.resolve()?;
        let prefix: Vec<String> = outer
            .iter()
            .zip(&point)
            .map(|(s, &x)| format_value(&s.name, x))
            .collect();
        let grid = match user_inner {
            Some(s) => s.grid.clone(),
            None => default_inner(plan.kind, &cfg),
        };
        let mut sc = Scenario::new(&cfg, plan.seed)?;
        if let Some(k) = plan.k_sim {
            sc = sc.with_k_sim(k);
        }
        let mut cols = names.clone();
        if let Some(axis) = inner {
            cols.push(axis.to_string());
        }
        match plan.kind {
            Kind::Laplace => laplace(plan, &cfg, &sc, &grid, &prefix, &cols, &mut out)?,
            Kind::Coverage | Kind::Rate => coverage(plan, &cfg, &sc, &grid, &prefix, &cols, &mut out)?,
            Kind::Sinr => sinr(plan, &cfg, &sc, &grid, &prefix, &cols, &mut out)?,
            Kind::Harvest => {
                let mc = harvest_curve(&sc, plan.slot_duration, plan.modulation, &grid, plan.trials);
                for (k, &tau) in grid.iter().enumerate() {
                    let a = harvested_data(&cfg.with_tau(tau), plan.modulation)?;
                    let c = &cfg;
                    let slots = 2.0 * (0.5 * c.w / (c.v * plan.slot_duration) + 1e-9).floor() + 1.0;
                    let upper = slots * plan.slot_duration * plan.modulation.bits(tau);
                    let params = with_param(&prefix, fmt_f64(tau));
                    out.push("harvested_data", &cols, params, Some(a), Some(&mc[k]), Some(upper));
                }
            }
            Kind::Optimize => optimize(plan, &cfg, &grid, &prefix, &names, &mut out)?,
            Kind::Transport => transport(plan, &cfg, &sc, &prefix, &names, &mut out)?,
        }
        configs.push(cfg);
    }
    Ok(Outcome {
        tables: out.tables,
        configs,
        notes: out.notes.into_iter().collect(),
    })
}

fn laplace(
    plan: &Plan,
    cfg: &NetworkConfig,
    sc: &Scenario,
    grid: &[f64],
    prefix: &[String],
    cols: &[String],
    out: &mut Collector,
) -> Result<(), RunError> {
    let shot_ev = LaplaceEvaluator::new(cfg, false)?;
    let intf_ev = LaplaceEvaluator::new(cfg, true)?;
    let shot_mc = empirical_laplace(sc, grid, plan.trials, false);
    let intf_mc = empirical_laplace(sc, grid, plan.trials, true);
    for (k, &s) in grid.iter().enumerate() {
        let params = with_param(prefix, fmt_f64(s));
        let shot = laplace_value(laplace_shot_noise(&shot_ev, s)?);
        out.push("laplace_shot_noise", cols, params.clone(), Some(shot), Some(&shot_mc[k]), Some(1.0));
        let intf = laplace_value(laplace_interference(&intf_ev, s)?);
        out.push("laplace_interference", cols, params.clone(), Some(intf), Some(&intf_mc[k]), Some(1.0));
        if cfg.noise > 0.0 {
            let en = (-s * cfg.noise).exp();
            let both = laplace_value(laplace_interference_plus_noise(&intf_ev, s, cfg.noise)?);
            let both_mc = intf_mc[k].scaled("laplace_interference_plus_noise", en);
            out.push("laplace_interference_plus_noise", cols, params.clone(), Some(both), Some(&both_mc), Some(1.0));
            let noise = AnalyticValue { value: en, error: 0.0 };
            out.push("laplace_noise", cols, params, Some(noise), None, None);
        }
    }
    Ok(())
}

fn coverage(
    plan: &Plan,
    cfg: &NetworkConfig,
    sc: &Scenario,
    grid: &[f64],
    prefix: &[String],
    cols: &[String],
    out: &mut Collector,
) -> Result<(), RunError> {
    let mc = coverage_curve(sc, grid, plan.trials);
    for (k, &tau) in grid.iter().enumerate() {
        let params = with_param(prefix, fmt_f64(tau));
        let c = cfg.with_tau(tau);
        if plan.kind == Kind::Rate {
            let bits = plan.modulation.bits(tau);
            let a = mean_rate(&c, plan.modulation)?;
            out.push("rate", cols, params, Some(a), Some(&mc[k].scaled("rate", bits)), Some(bits));
        } else {
            let a = coverage_probability(&c)?;
            out.push("coverage", cols, params, Some(a), Some(&mc[k]), Some(1.0));
        }
    }
    Ok(())
}

fn sinr(
    plan: &Plan,
    cfg: &NetworkConfig,
    sc: &Scenario,
    grid: &[f64],
    prefix: &[String],
    cols: &[String],
    out: &mut Collector,
) -> Result<(), RunError> {
    let sir_cfg = NetworkConfig {
        noise: 0.0,
        ..cfg.clone()
    };
    let curves = coverage_curves(sc, grid, &[cfg.noise, 0.0], plan.trials);
    for (k, &tau) in grid.iter().enumerate() {
        let params = with_param(prefix, fmt_f64(tau));
        let a = coverage_probability(&cfg.with_tau(tau))?;
        out.push("coverage_sinr", cols, params.clone(), Some(a), Some(&curves[0][k]), Some(1.0));
        let a = coverage_probability(&sir_cfg.with_tau(tau))?;
        out.push("coverage_sir", cols, params, Some(a), Some(&curves[1][k]), Some(1.0));
    }
    Ok(())
}

fn optimize(
    plan: &Plan,
    cfg: &NetworkConfig,
    grid: &[f64],
    prefix: &[String],
    names: &[String],
    out: &mut Collector,
) -> Result<(), RunError> {
    let bits = plan.modulation.bits(cfg.tau);
    let mut cols = names.to_vec();
    cols.extend(["w".to_string(), "w_over_mu".to_string()]);
    for &w in grid {
        let v = objective(cfg, w)?;
        let a = AnalyticValue {
            value: bits * v.value,
            error: bits * v.error,
        };
        let mc = if w > 0.0 {
            let mut sc = Scenario::new(&cfg.with_w(w), plan.seed)?;
            if let Some(k) = plan.k_sim {
                sc = sc.with_k_sim(k);
            }
            Some(coverage_estimate(&sc, plan.trials).scaled("rate", bits))
        } else {
            None
        };
        let mut params = with_param(prefix, fmt_f64(w));
        params.push(fmt_f64(w / cfg.mu));
        out.push("window_rate", &cols, params, Some(a), mc.as_ref(), Some(bits));
    }
    let tolerance = 1e-4 * cfg.mu;
    let opt = optimize_window_with(cfg, tolerance, plan.optimizer_grid)?;
    for w in &opt.warnings {
        out.notes.insert(format!("window_optimum at {}: {w}", prefix.join(",")));
    }
    let mut cols = names.to_vec();
    cols.push("quantity".into());
    let exact = |v: f64| AnalyticValue { value: v, error: 0.0 };
    let rows = [
        ("w_star", AnalyticValue { value: opt.w_star, error: tolerance }),
        ("w_star_over_mu", AnalyticValue { value: opt.w_star / cfg.mu, error: tolerance / cfg.mu }),
        ("rate_at_w_star", AnalyticValue { value: bits * opt.value, error: bits * opt.error }),
        ("unimodal", exact(f64::from(u8::from(opt.sweep.is_unimodal())))),
        ("ambiguous", exact(f64::from(u8::from(opt.ambiguous)))),
    ];
    for (q, a) in rows {
        out.push("window_optimum", &cols, with_param(prefix, q.into()), Some(a), None, None);
    }
    Ok(())
}

fn transport(
    plan: &Plan,
    cfg: &NetworkConfig,
    sc: &Scenario,
    prefix: &[String],
    names: &[String],
    out: &mut Collector,
) -> Result<(), RunError> {
    let a = check_identity_analytic(cfg, plan.modulation)?;
    let s = check_identity_simulated(sc, plan.modulation, plan.trials, plan.slot_duration);
    let mut cols = names.to_vec();
    cols.push("quantity".into());
    let est = |metric: &str, mean: f64, se: f64| SimEstimate {
        metric: metric.into(),
        mean,
        std_error: se,
        trials: plan.trials,
        seed: plan.seed,
        ci95: (mean - 1.96 * se, mean + 1.96 * se),
        notes: Vec::new(),
    };
    let rows = [
        ("harvested_data", a.harvested, a.harvested_error, s.harvested, s.harvested_error),
        ("rate", a.rate, a.rate_error, s.rate, s.rate_error),
        ("ratio", a.ratio, a.ratio_error, s.ratio, s.ratio_error),
    ];
    for (q, av, ae, sv, se) in rows {
        let mc = est(q, sv, se);
        out.push(
            "transport",
            &cols,
            with_param(prefix, q.into()),
            Some(AnalyticValue { value: av, error: ae }),
            Some(&mc),
            None,
        );
    }
    Ok(())
}
