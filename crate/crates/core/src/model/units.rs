//! Unit-suffixed quantity parsing for config documents.
//!
//! Everything is converted to strict SI on the way in: meters, seconds,
//! watts, devices per square meter and linear power ratios.

use super::ConfigError;

/// Physical dimension a config key is expected to carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    /// Devices per unit area.
    Density,
    Speed,
    Time,
    Power,
    /// Power spectral density (W/Hz).
    PowerDensity,
    Frequency,
    /// Linear power ratio, dB accepted.
    Ratio,
    Dimensionless,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Length => "length",
            Dimension::Density => "density",
            Dimension::Speed => "speed",
            Dimension::Time => "time",
            Dimension::Power => "power",
            Dimension::PowerDensity => "power density",
            Dimension::Frequency => "frequency",
            Dimension::Ratio => "ratio",
            Dimension::Dimensionless => "dimensionless",
        }
    }
}

enum Scale {
    Linear(f64),
    /// 10^(x/10) * factor
    Decibel(f64),
}

fn scale_for(dim: Dimension, unit: &str) -> Option<Scale> {
    use Scale::*;
    let u = unit.trim();
    let s = match dim {
        Dimension::Length => match u {
            "" | "m" => Linear(1.0),
            "km" => Linear(1e3),
            "cm" => Linear(1e-2),
            _ => return None,
        },
        Dimension::Density => match u {
            "" | "/m2" | "/m^2" | "m-2" | "m^-2" | "/m²" | "m⁻²" => Linear(1.0),
            "/km2" | "/km^2" | "km-2" | "km^-2" | "/km²" | "km⁻²" => Linear(1e-6),
            _ => return None,
        },
        Dimension::Speed => match u {
            "" | "m/s" | "mps" => Linear(1.0),
            "km/h" | "kmh" | "kph" => Linear(1.0 / 3.6),
            _ => return None,
        },
        Dimension::Time => match u {
            "" | "s" => Linear(1.0),
            "ms" => Linear(1e-3),
            "us" | "µs" => Linear(1e-6),
            _ => return None,
        },
        Dimension::Power => match u {
            "" | "W" => Linear(1.0),
            "mW" => Linear(1e-3),
            "dBW" => Decibel(1.0),
            "dBm" => Decibel(1e-3),
            _ => return None,
        },
        Dimension::PowerDensity => match u {
            "" | "W/Hz" => Linear(1.0),
            "dBW/Hz" => Decibel(1.0),
            "dBm/Hz" => Decibel(1e-3),
            _ => return None,
        },
        Dimension::Frequency => match u {
            "" | "Hz" => Linear(1.0),
            "kHz" => Linear(1e3),
            "MHz" => Linear(1e6),
            "GHz" => Linear(1e9),
            _ => return None,
        },
        Dimension::Ratio => match u {
            "" => Linear(1.0),
            "dB" => Decibel(1.0),
            _ => return None,
        },
        Dimension::Dimensionless => match u {
            "" => Linear(1.0),
            _ => return None,
        },
    };
    Some(s)
}

/// Splits `"1000/km2"`, `"2 km"`, `"-104 dBm"` into number and unit text.
fn split_number(text: &str) -> Option<(f64, &str)> {
    let t = text.trim();
    let mut end = 0;
    for (idx, ch) in t.char_indices() {
        let numeric = ch.is_ascii_digit()
            || ch == '.'
            || ch == '+'
            || ch == '-'
            || ((ch == 'e' || ch == 'E')
                && t[idx + 1..]
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+'));
        if !numeric {
            break;
        }
        end = idx + ch.len_utf8();
    }
    let value: f64 = t[..end].parse().ok()?;
    Some((value, t[end..].trim()))
}

/// Parses a unit-suffixed quantity into SI.
pub fn parse_quantity(key: &str, dim: Dimension, text: &str) -> Result<f64, ConfigError> {
    let bad = |reason: String| ConfigError::BadValue {
        key: key.to_string(),
        value: text.to_string(),
        reason,
    };
    let (value, unit) = split_number(text).ok_or_else(|| bad("not a number".into()))?;
    let scale = scale_for(dim, unit)
        .ok_or_else(|| bad(format!("unit '{unit}' is not a {} unit", dim.name())))?;
    let si = match scale {
        Scale::Linear(f) => value * f,
        Scale::Decibel(f) => 10f64.powf(value / 10.0) * f,
    };
    if !si.is_finite() {
        return Err(bad("value is not finite".into()));
    }
    Ok(si)
}

/// Linear power ratio to dB.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_and_densities() {
        assert_eq!(parse_quantity("mu", Dimension::Length, "2 km").unwrap(), 2000.0);
        assert_eq!(parse_quantity("mu", Dimension::Length, "250").unwrap(), 250.0);
        let d = parse_quantity("lambda", Dimension::Density, "1000/km2").unwrap();
        assert!((d - 1e-3).abs() < 1e-18);
        let d = parse_quantity("lambda", Dimension::Density, "1e5 km^-2").unwrap();
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn decibels() {
        assert_eq!(parse_quantity("tau", Dimension::Ratio, "0 dB").unwrap(), 1.0);
        assert_eq!(parse_quantity("tau", Dimension::Ratio, "10dB").unwrap(), 10.0);
        let p = parse_quantity("p", Dimension::Power, "23 dBm").unwrap();
        assert!((p - 0.199_526_231_496_887_97).abs() < 1e-15);
        let n = parse_quantity("n", Dimension::PowerDensity, "-174 dBm/Hz").unwrap();
        assert!((n / 3.981_071_705_534_97e-21 - 1.0).abs() < 1e-12);
        assert!((dbm_to_watts(-104.0) / 3.981_071_705_534_97e-14 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn speed_conversion() {
        let v = parse_quantity("v", Dimension::Speed, "36 km/h").unwrap();
        assert!((v - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_wrong_unit() {
        assert!(parse_quantity("mu", Dimension::Length, "2 dB").is_err());
        assert!(parse_quantity("mu", Dimension::Length, "abc").is_err());
        assert!(parse_quantity("tau", Dimension::Ratio, "1e999").is_err());
    }
}
