//! Flat `key=value` scenario files.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Keys not
//! listed below are rejected. Defaults:
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `n_elements` | 40 | surface size N |
//! | `carrier_freq` | 1.8e9 | Hz |
//! | `d_h`, `d_v` | lambda/8 | element spacing in meters |
//! | `regime` | `iid` | `iid` or `correlated` |
//! | `kappa` | `none` | Von Mises concentration, `none` disables phase errors |
//! | `r_dest` | 10 | surface to destination distance, meters |
//! | `noise_dbm` | -90 | noise power |
//! | `power_grid_dbm` | `-40:2:20` | list `a,b,c` or range `start:step:stop` |
//! | `rate_target` | 1 | bpcu |
//! | `scheme` | `phase_free` | `phase_free`, `classical_pb` or `rpsa` |
//! | `quantization` | 2 | number of phase levels or `continuous` |
//! | `error_model` | `estimation` | `estimation` or `realized` |
//! | `amplitude_coupling` | `true` | |
//! | `ideal_full_reflection` | `true` | |
//! | `trials` | 10000 | |
//! | `seed` | 1 | |
//! | `r_source_override` | `none` | fixed source distance in meters |

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use pbfree_core::beamforming::{PhaseErrorModel, PhaseQuantization};
use pbfree_core::montecarlo::ScenarioConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn at(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: Some(line),
        message: message.into(),
    }
}

/// `start:step:stop` (inclusive, within a small tolerance) or a comma list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [start, step, stop] => {
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"));
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
                return Err("range step must be positive and the bounds finite".into());
            }
            if stop < start {
                return Err("range stop is below its start".into());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            if count > 100_000 {
                return Err("range has too many points".into());
            }
            (0..=count).map(|k| start + step * k as f64).collect()
        }
        [_] => text
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", s.trim())))
            .collect::<Result<Vec<f64>, String>>()?,
        _ => return Err(format!("`{text}` is neither a list nor start:step:stop")),
    };
    Ok(grid)
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

fn optional(key: &str, value: &str) -> Result<Option<f64>, String> {
    if value == "none" {
        Ok(None)
    } else {
        parse_value(key, value).map(Some)
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("invalid value `{value}` for `{key}`, expected true or false")),
    }
}

fn apply(config: &mut ScenarioConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "n_elements" => config.n_elements = parse_value(key, value)?,
        "carrier_freq" => config.carrier_freq = parse_value(key, value)?,
        "d_h" => config.d_h = optional(key, value)?,
        "d_v" => config.d_v = optional(key, value)?,
        "regime" => config.regime = value.parse().map_err(|e| format!("{e}"))?,
        "kappa" => config.kappa = optional(key, value)?,
        "r_dest" => config.r_dest = parse_value(key, value)?,
        "noise_dbm" => config.noise_dbm = parse_value(key, value)?,
        "power_grid_dbm" => config.power_grid_dbm = parse_grid(value).map_err(|e| format!("power_grid_dbm: {e}"))?,
        "rate_target" => config.rate_target = parse_value(key, value)?,
        "scheme" => config.scheme = value.parse().map_err(|e| format!("{e}"))?,
        "quantization" => {
            config.quantization = if value == "continuous" {
                PhaseQuantization::Continuous
            } else {
                PhaseQuantization::Levels(parse_value(key, value)?)
            }
        }
        "error_model" => {
            config.error_model = match value {
                "estimation" => PhaseErrorModel::Estimation,
                "realized" => PhaseErrorModel::Realized,
                _ => return Err(format!("invalid value `{value}` for `{key}`")),
            }
        }
        "amplitude_coupling" => config.amplitude_coupling = parse_bool(key, value)?,
        "ideal_full_reflection" => config.ideal_full_reflection = parse_bool(key, value)?,
        "trials" => config.trials = parse_value(key, value)?,
        "seed" => config.seed = parse_value(key, value)?,
        "r_source_override" => config.r_source_override = optional(key, value)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

/// Parses and validates a scenario from text.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut config = ScenarioConfig::default();
    let mut lines_of: Vec<(&'static str, usize)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at(line_no, format!("expected key=value, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(at(line_no, format!("duplicate key `{key}`")));
        }
        apply(&mut config, key, value).map_err(|m| at(line_no, m))?;
        if let Some(k) = KEYS.iter().find(|k| **k == key) {
            lines_of.push((k, line_no));
        }
    }
    config.validate().map_err(|e| {
        let field = match &e {
            pbfree_core::Error::InvalidArgument { name, .. } => Some(*name),
            _ => None,
        };
        ConfigError {
            line: field.and_then(|f| lines_of.iter().find(|(k, _)| *k == f).map(|(_, l)| *l)),
            message: e.to_string(),
        }
    })?;
    Ok(config)
}

const KEYS: [&str; 18] = [
    "n_elements",
    "carrier_freq",
    "d_h",
    "d_v",
    "regime",
    "kappa",
    "r_dest",
    "noise_dbm",
    "power_grid_dbm",
    "rate_target",
    "scheme",
    "quantization",
    "error_model",
    "amplitude_coupling",
    "ideal_full_reflection",
    "trials",
    "seed",
    "r_source_override",
];

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config_str(&text)
}
