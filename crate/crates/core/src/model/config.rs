//! Flat TOML config documents with unit-suffixed values.
//!
//! ```toml
//! mode = "1d"
//! lambda = "1000/km2"
//! mu = "2 km"
//! w = "0.25 km"
//! l = "0.5 km"
//! h = "0.25 km"
//! tau = "0 dB"
//! ```
//!
//! Bare numbers are taken as SI. `noise` may instead be given as
//! `noise_density` times `bandwidth`.

use std::collections::BTreeMap;
use std::path::Path;

use super::units::{parse_quantity, Dimension};
use super::{ConfigError, Mode, NetworkConfig};

const REQUIRED: [&str; 5] = ["lambda", "mu", "w", "l", "h"];

fn dimension_of(key: &str) -> Option<Dimension> {
    Some(match key {
        "lambda" => Dimension::Density,
        "mu" | "nu" | "h" | "w" | "l" | "pathloss_ref" => Dimension::Length,
        "v" => Dimension::Speed,
        "alpha" | "omega" => Dimension::Dimensionless,
        "p" | "noise" => Dimension::Power,
        "noise_density" => Dimension::PowerDensity,
        "bandwidth" => Dimension::Frequency,
        "tau" => Dimension::Ratio,
        _ => return None,
    })
}

/// Raw key/value view of a config document, before unit conversion.
///
/// Kept separate from [`NetworkConfig`] so that `--param key=value`
/// overrides can be layered on before anything is parsed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDocument {
    entries: BTreeMap<String, String>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for (key, value) in table {
            let text = match value {
                toml::Value::String(s) => s,
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => format!("{f:?}"),
                other => {
                    return Err(ConfigError::BadValue {
                        key,
                        value: other.to_string(),
                        reason: "expected a string or number".into(),
                    })
                }
            };
            entries.insert(key, text);
        }
        Ok(ConfigDocument { entries })
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.trim().to_string(), value.trim().to_string());
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax(format!("override '{assignment}' is not key=value")))?;
        self.set(k, v);
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn resolve(&self) -> Result<NetworkConfig, ConfigError> {
        for key in self.entries.keys() {
            if key != "mode" && key != "m" && dimension_of(key).is_none() {
                return Err(ConfigError::UnknownField(key.clone()));
            }
        }
        for key in REQUIRED {
            if !self.entries.contains_key(key) {
                return Err(ConfigError::MissingField(key.to_string()));
            }
        }
        let q = |key: &str| -> Result<Option<f64>, ConfigError> {
            match self.entries.get(key) {
                None => Ok(None),
                Some(text) => parse_quantity(key, dimension_of(key).unwrap(), text).map(Some),
            }
        };
        let defaults = NetworkConfig::default();
        let mode = match self.entries.get("mode") {
            None => Mode::Strip,
            Some(s) => s.parse().map_err(|reason| ConfigError::BadValue {
                key: "mode".into(),
                value: s.clone(),
                reason,
            })?,
        };
        let m = match self.entries.get("m") {
            None => defaults.m,
            Some(s) => s.trim().parse::<u32>().map_err(|_| ConfigError::BadValue {
                key: "m".into(),
                value: s.clone(),
                reason: "Nakagami shape must be a positive integer".into(),
            })?,
        };
        let noise = match (q("noise")?, q("noise_density")?, q("bandwidth")?) {
            (Some(_), Some(_), _) => {
                return Err(ConfigError::Syntax(
                    "give either 'noise' or 'noise_density' with 'bandwidth', not both".into(),
                ))
            }
            (Some(n), None, _) => n,
            (None, Some(d), Some(b)) => d * b,
            (None, Some(_), None) => return Err(ConfigError::MissingField("bandwidth".into())),
            (None, None, _) => 0.0,
        };
        let cfg = NetworkConfig {
            lambda: q("lambda")?.unwrap(),
            mu: q("mu")?.unwrap(),
            nu: q("nu")?,
            h: q("h")?.unwrap(),
            w: q("w")?.unwrap(),
            l: q("l")?.unwrap(),
            v: q("v")?.unwrap_or(defaults.v),
            alpha: q("alpha")?.unwrap_or(defaults.alpha),
            m,
            omega: q("omega")?.unwrap_or(defaults.omega),
            p: q("p")?.unwrap_or(defaults.p),
            tau: q("tau")?.unwrap_or(defaults.tau),
            noise,
            pathloss_ref: q("pathloss_ref")?.unwrap_or(defaults.pathloss_ref),
            mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Converts one unit-suffixed value for `key` to SI.
pub fn parse_field(key: &str, text: &str) -> Result<f64, ConfigError> {
    if key == "m" {
        return text.trim().parse::<u32>().map(f64::from).map_err(|_| ConfigError::BadValue {
            key: "m".into(),
            value: text.to_string(),
            reason: "Nakagami shape must be a positive integer".into(),
        });
    }
    let dim = dimension_of(key).ok_or_else(|| ConfigError::UnknownField(key.to_string()))?;
    parse_quantity(key, dim, text)
}

/// Parses and validates a config document.
pub fn load_config(text: &str) -> Result<NetworkConfig, ConfigError> {
    ConfigDocument::parse(text)?.resolve()
}

pub fn load_config_file(path: &Path) -> Result<NetworkConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    load_config(&text)
}

impl NetworkConfig {
    /// Emits the config as a document of bare SI numbers. Reloading the
    /// output reproduces every field bit-for-bit.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("mode", format!("\"{}\"", self.mode));
        put("lambda", format!("{:?}", self.lambda));
        put("mu", format!("{:?}", self.mu));
        if let Some(nu) = self.nu {
            put("nu", format!("{nu:?}"));
        }
        put("h", format!("{:?}", self.h));
        put("w", format!("{:?}", self.w));
        put("l", format!("{:?}", self.l));
        put("v", format!("{:?}", self.v));
        put("alpha", format!("{:?}", self.alpha));
        put("m", format!("{}", self.m));
        put("omega", format!("{:?}", self.omega));
        put("p", format!("{:?}", self.p));
        put("tau", format!("{:?}", self.tau));
        put("noise", format!("{:?}", self.noise));
        put("pathloss_ref", format!("{:?}", self.pathloss_ref));
        out
    }
}
