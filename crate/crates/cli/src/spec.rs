//! Experiment specifications: which experiment, on which config, over
//! which parameter grids.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;
use uav_harvest::model::{parse_field, ConfigError};
use uav_harvest::{Mode, ModulationRule};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),
    #[error("unknown figure preset '{0}' (available: 3-11, 2d)")]
    UnknownFigure(String),
    #[error("sweep '{0}' is not of the form name=grid")]
    SweepSyntax(String),
    #[error("sweep over '{0}' has an empty grid")]
    EmptyGrid(String),
    #[error("sweep over '{name}' is not strictly increasing at {value}")]
    NotIncreasing { name: String, value: f64 },
    #[error("'{0}' is swept twice")]
    DuplicateSweep(String),
    #[error("sweep over '{name}': {reason}")]
    BadGrid { name: String, reason: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no config given; use --config or a figure preset")]
    NoConfig,
}

/// Experiment kinds; `Figure` wraps a preset id such as `"3"` or `"2d"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ExperimentId {
    Laplace,
    Coverage,
    Rate,
    Harvest,
    Optimize,
    Transport,
    Sinr,
    Lattice,
    Figure(String),
}

impl FromStr for ExperimentId {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        Ok(match s.trim() {
            "laplace" => ExperimentId::Laplace,
            "coverage" => ExperimentId::Coverage,
            "rate" => ExperimentId::Rate,
            "harvest" => ExperimentId::Harvest,
            "optimize" => ExperimentId::Optimize,
            "transport" => ExperimentId::Transport,
            "sinr" => ExperimentId::Sinr,
            "2d" => ExperimentId::Lattice,
            other => match other.strip_prefix("figure:") {
                Some(fig) => ExperimentId::Figure(fig.to_string()),
                None => return Err(SpecError::UnknownExperiment(other.to_string())),
            },
        })
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExperimentId::Laplace => f.write_str("laplace"),
            ExperimentId::Coverage => f.write_str("coverage"),
            ExperimentId::Rate => f.write_str("rate"),
            ExperimentId::Harvest => f.write_str("harvest"),
            ExperimentId::Optimize => f.write_str("optimize"),
            ExperimentId::Transport => f.write_str("transport"),
            ExperimentId::Sinr => f.write_str("sinr"),
            ExperimentId::Lattice => f.write_str("2d"),
            ExperimentId::Figure(n) => write!(f, "figure:{n}"),
        }
    }
}

/// One swept variable with its grid in SI units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub name: String,
    pub grid: Vec<f64>,
}

fn parse_value(name: &str, text: &str) -> Result<f64, SpecError> {
    if name == "s" {
        return text.trim().parse().map_err(|_| SpecError::BadGrid {
            name: name.into(),
            reason: format!("'{text}' is not a number"),
        });
    }
    Ok(parse_field(name, text)?)
}

impl Sweep {
    pub fn new(name: &str, grid: Vec<f64>) -> Result<Self, SpecError> {
        let sweep = Sweep {
            name: name.to_string(),
            grid,
        };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.grid.is_empty() {
            return Err(SpecError::EmptyGrid(self.name.clone()));
        }
        for pair in self.grid.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(SpecError::NotIncreasing {
                    name: self.name.clone(),
                    value: pair[1],
                });
            }
        }
        if let Some(bad) = self.grid.iter().find(|x| !x.is_finite()) {
            return Err(SpecError::BadGrid {
                name: self.name.clone(),
                reason: format!("non-finite value {bad}"),
            });
        }
        Ok(())
    }

    /// `n` evenly spaced points from `a` to `b` inclusive.
    pub fn linear(name: &str, a: f64, b: f64, n: usize) -> Result<Self, SpecError> {
        Sweep::new(name, spaced(a, b, n, false))
    }

    /// `n` log-spaced points from `a` to `b` inclusive.
    pub fn logarithmic(name: &str, a: f64, b: f64, n: usize) -> Result<Self, SpecError> {
        if !(a > 0.0 && b > 0.0) {
            return Err(SpecError::BadGrid {
                name: name.into(),
                reason: "log grid needs positive end points".into(),
            });
        }
        Sweep::new(name, spaced(a, b, n, true))
    }
}

fn spaced(a: f64, b: f64, n: usize, log: bool) -> Vec<f64> {
    let (a, b) = if log { (a.ln(), b.ln()) } else { (a, b) };
    (0..n)
        .map(|k| {
            let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
            let x = a + (b - a) * t;
            if log {
                x.exp()
            } else {
                x
            }
        })
        .collect()
}

/// Parses `name=v1,v2,...`, `name=lin:a:b:n` or `name=log:a:b:n`. Values
/// carry the same unit suffixes as config documents; `log` spacing is in
/// SI (so `tau=log:0dB:30dB:7` is evenly spaced in dB).
impl FromStr for Sweep {
    type Err = SpecError;

    fn from_str(text: &str) -> Result<Self, SpecError> {
        let (name, grid) = text
            .split_once('=')
            .ok_or_else(|| SpecError::SweepSyntax(text.to_string()))?;
        let name = name.trim();
        let grid = grid.trim();
        for kind in ["lin:", "log:"] {
            if let Some(rest) = grid.strip_prefix(kind) {
                let parts: Vec<&str> = rest.split(':').collect();
                if parts.len() != 3 {
                    return Err(SpecError::SweepSyntax(text.to_string()));
                }
                let a = parse_value(name, parts[0])?;
                let b = parse_value(name, parts[1])?;
                let n: usize = parts[2].trim().parse().map_err(|_| SpecError::BadGrid {
                    name: name.into(),
                    reason: format!("'{}' is not a point count", parts[2]),
                })?;
                return if kind == "lin:" {
                    Sweep::linear(name, a, b, n)
                } else {
                    Sweep::logarithmic(name, a, b, n)
                };
            }
        }
        let values = grid
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| parse_value(name, t))
            .collect::<Result<Vec<f64>, _>>()?;
        Sweep::new(name, values)
    }
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub config: Option<PathBuf>,
    /// `key=value` overrides, applied after the config file.
    pub overrides: Vec<String>,
    pub sweeps: Vec<Sweep>,
    pub out: PathBuf,
    pub seed: u64,
    /// `None` uses the preset's count, else [`DEFAULT_TRIALS`].
    pub trials: Option<u64>,
    pub mode: Option<Mode>,
    pub modulation: Option<ModulationRule>,
    /// Passage slot length in seconds.
    pub slot_duration: Option<f64>,
    /// Simulated windows on each side of the serving one.
    pub k_sim: Option<usize>,
    /// Fail when analytic and simulated values disagree by more than
    /// [`VERIFY_SIGMAS`] standard errors.
    pub verify: bool,
}

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 20_190_101;
pub const DEFAULT_SLOT: f64 = 0.01;
pub const VERIFY_SIGMAS: f64 = 5.0;

impl ExperimentSpec {
    pub fn new(id: ExperimentId, out: PathBuf) -> Self {
        ExperimentSpec {
            id,
            config: None,
            overrides: Vec::new(),
            sweeps: Vec::new(),
            out,
            seed: DEFAULT_SEED,
            trials: None,
            mode: None,
            modulation: None,
            slot_duration: None,
            k_sim: None,
            verify: false,
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        for (k, s) in self.sweeps.iter().enumerate() {
            s.validate()?;
            if self.sweeps[..k].iter().any(|o| o.name == s.name) {
                return Err(SpecError::DuplicateSweep(s.name.clone()));
            }
        }
        Ok(())
    }
}
