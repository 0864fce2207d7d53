//! CSV tables and the run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! rerun with the same inputs produces byte-identical files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use uav_harvest::analytic::AnalyticValue;
use uav_harvest::sim::SimEstimate;

pub const VALUE_COLUMNS: [&str; 6] = ["analytic", "analytic_err", "mc_mean", "mc_se", "trials", "seed"];

/// One table row. Parameter cells are preformatted text; the value cells
/// are optional so that analytic-only or simulation-only rows stay valid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub params: Vec<String>,
    pub analytic: Option<AnalyticValue>,
    pub mc: Option<McCell>,
    /// Upper end of the metric's range `[0, upper]`, when known.
    #[serde(skip)]
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McCell {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl From<&SimEstimate> for McCell {
    fn from(e: &SimEstimate) -> Self {
        McCell {
            mean: e.mean,
            std_error: e.std_error,
            trials: e.trials,
            seed: e.seed,
        }
    }
}

impl Row {
    pub fn new(params: Vec<String>, analytic: Option<AnalyticValue>, mc: Option<&SimEstimate>) -> Self {
        Row {
            params,
            analytic,
            mc: mc.map(McCell::from),
            upper: None,
        }
    }

    pub fn bounded(mut self, upper: f64) -> Self {
        self.upper = Some(upper);
        self
    }

    /// `(|analytic - mc| - analytic_err)^+ / se`; `None` unless both sides
    /// are present. For a metric bounded in `[0, upper]` the SE is floored
    /// by the largest standard deviation such a variable with the analytic
    /// mean can have, so small runs whose samples all coincide are judged
    /// sensibly. Zero SE otherwise counts as a disagreement only when the
    /// values differ beyond the analytic error.
    pub fn disagreement(&self) -> Option<f64> {
        let (a, m) = (self.analytic?, self.mc.as_ref()?);
        let gap = ((a.value - m.mean).abs() - a.error).max(0.0);
        let floor = self.upper.map_or(0.0, |u| {
            let p = a.value.clamp(0.0, u);
            (p * (u - p) / m.trials.max(1) as f64).sqrt()
        });
        let se = m.std_error.max(floor);
        Some(if gap <= 1e-12 * a.value.abs().max(1.0) {
            0.0
        } else if se > 0.0 {
            gap / se
        } else {
            f64::INFINITY
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub metric: String,
    pub params: Vec<String>,
    pub rows: Vec<Row>,
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

impl Table {
    pub fn new(metric: &str, params: Vec<String>) -> Self {
        Table {
            metric: metric.to_string(),
            params,
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> Vec<String> {
        self.params
            .iter()
            .cloned()
            .chain(VALUE_COLUMNS.iter().map(|s| s.to_string()))
            .collect()
    }

    pub fn write<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.header())?;
        for row in &self.rows {
            let mut rec = row.params.clone();
            match row.analytic {
                Some(a) => rec.extend([fmt_f64(a.value), fmt_f64(a.error)]),
                None => rec.extend([String::new(), String::new()]),
            }
            match &row.mc {
                Some(m) => rec.extend([
                    fmt_f64(m.mean),
                    fmt_f64(m.std_error),
                    m.trials.to_string(),
                    m.seed.to_string(),
                ]),
                None => rec.extend([String::new(), String::new(), String::new(), String::new()]),
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Written next to the CSV files; the only place wall time appears.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub seed: u64,
    pub trials: u64,
    pub spec: serde_json::Value,
    /// Resolved configuration of every grid point.
    pub configs: Vec<serde_json::Value>,
    pub files: Vec<String>,
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

/// Writes every table as `<metric>.csv` and the manifest as
/// `manifest.json`; returns the paths written.
pub fn write_run(dir: &Path, tables: &[Table], manifest: &mut Manifest) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in tables {
        let path = dir.join(format!("{}.csv", t.metric));
        fs::write(&path, t.to_csv_string())?;
        manifest.files.push(format!("{}.csv", t.metric));
        written.push(path);
    }
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    fs::write(&path, json + "\n")?;
    written.push(path);
    Ok(written)
}
