//! Experiment runner: figure presets, parameter sweeps, CSV output and the
//! verification suite behind the `uavh` binary.

pub mod experiments;
pub mod output;
pub mod presets;
pub mod spec;
pub mod verify;

use std::path::PathBuf;
use std::time::Instant;

use uav_harvest::model::ConfigDocument;
use uav_harvest::ModulationRule;

pub use experiments::{run_plan, Outcome, Plan, RunError};
pub use output::{Manifest, Row, Table};
pub use presets::{preset, Kind, Preset};
pub use spec::{ExperimentId, ExperimentSpec, SpecError, Sweep};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "UAVH_OUT_DIR";

/// Builds the plan: preset (if any), then config file, then `--param`
/// overrides, then `--mode`; user sweeps replace preset sweeps of the same
/// variable.
pub fn resolve_plan(spec: &ExperimentSpec) -> Result<Plan, RunError> {
    spec.validate()?;
    let preset = match &spec.id {
        ExperimentId::Figure(n) => Some(preset(n)?),
        _ => None,
    };
    let kind = match (&spec.id, &preset) {
        (_, Some(p)) => p.kind,
        (ExperimentId::Laplace, _) => Kind::Laplace,
        (ExperimentId::Coverage, _) | (ExperimentId::Lattice, _) => Kind::Coverage,
        (ExperimentId::Rate, _) => Kind::Rate,
        (ExperimentId::Harvest, _) => Kind::Harvest,
        (ExperimentId::Optimize, _) => Kind::Optimize,
        (ExperimentId::Transport, _) => Kind::Transport,
        (ExperimentId::Sinr, _) => Kind::Sinr,
        (ExperimentId::Figure(_), None) => unreachable!("figure ids always carry a preset"),
    };
    let mut doc = preset.as_ref().map(Preset::document).unwrap_or_default();
    match &spec.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                uav_harvest::model::ConfigError::Io(format!("{}: {e}", path.display()))
            })?;
            for (k, v) in ConfigDocument::parse(&text)?.entries() {
                doc.set(k, v);
            }
        }
        None if preset.is_none() => return Err(SpecError::NoConfig.into()),
        None => {}
    }
    for o in &spec.overrides {
        doc.apply_override(o)?;
    }
    if spec.id == ExperimentId::Lattice {
        doc.set("mode", "2d");
    }
    if let Some(mode) = spec.mode {
        doc.set("mode", &mode.to_string());
    }
    let mut sweeps = preset.as_ref().map(|p| p.sweeps.clone()).unwrap_or_default();
    for s in &spec.sweeps {
        match sweeps.iter_mut().find(|o| o.name == s.name) {
            Some(o) => *o = s.clone(),
            None => sweeps.push(s.clone()),
        }
    }
    // fail early on a broken base document
    doc.resolve()?;
    Ok(Plan {
        kind,
        document: doc,
        sweeps,
        seed: spec.seed,
        trials: spec
            .trials
            .or(preset.as_ref().and_then(|p| p.trials))
            .unwrap_or(spec::DEFAULT_TRIALS),
        modulation: spec
            .modulation
            .or(preset.as_ref().map(|p| p.modulation))
            .unwrap_or(ModulationRule::FloorLog2),
        slot_duration: spec.slot_duration.unwrap_or(spec::DEFAULT_SLOT),
        optimizer_grid: preset
            .as_ref()
            .and_then(|p| p.optimizer_grid)
            .unwrap_or(uav_harvest::optimize::DEFAULT_GRID_POINTS),
        k_sim: spec.k_sim.or(preset.as_ref().and_then(|p| p.k_sim)),
    })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outcome: Outcome,
    pub files: Vec<PathBuf>,
    /// Rows beyond the `--verify` threshold, as `metric [params]: z`.
    pub disagreements: Vec<String>,
    pub wall_time_s: f64,
}

pub fn run(spec: &ExperimentSpec) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let plan = resolve_plan(spec)?;
    let outcome = run_plan(&plan)?;
    let mut disagreements = Vec::new();
    if spec.verify {
        for t in &outcome.tables {
            for r in &t.rows {
                if let Some(z) = r.disagreement() {
                    if z > spec::VERIFY_SIGMAS {
                        disagreements.push(format!("{} [{}]: {z:.2} SE", t.metric, r.params.join(",")));
                    }
                }
            }
        }
    }
    let wall_time_s = start.elapsed().as_secs_f64();
    let mut manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: spec.id.to_string(),
        seed: plan.seed,
        trials: plan.trials,
        spec: serde_json::json!({
            "config": spec.config,
            "overrides": spec.overrides,
            "sweeps": plan.sweeps,
            "modulation": plan.modulation,
            "slot_duration": plan.slot_duration,
            "optimizer_grid": plan.optimizer_grid,
            "k_sim": plan.k_sim,
            "verify": spec.verify,
        }),
        configs: outcome
            .configs
            .iter()
            .map(|c| serde_json::to_value(c).expect("configs serialize"))
            .collect(),
        files: Vec::new(),
        notes: outcome.notes.clone(),
        wall_time_s,
    };
    let files = output::write_run(&spec.out, &outcome.tables, &mut manifest)?;
    Ok(RunSummary {
        outcome,
        files,
        disagreements,
        wall_time_s,
    })
}
