//! Flat `key = value` experiment configuration and named presets.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use super::{EtaChoice, ExperimentKind, ExperimentSpec, TransportChoice};
use crate::apps::PcrBasis;
use crate::datagen::Link;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("invalid value for '{key}': {message}")]
    Field { key: String, message: String },
    #[error("configuration is empty")]
    Empty,
    #[error("unknown preset '{0}' (see `distpca presets`)")]
    UnknownPreset(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid experiment: {0}")]
    Invalid(String),
}

fn field(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        key: key.to_string(),
        message: message.into(),
    }
}

pub const KEYS: &[&str] = &[
    "kind",
    "d",
    "m",
    "k",
    "delta",
    "l",
    "t",
    "t_inner",
    "eta",
    "c0",
    "skewness",
    "noise_var",
    "link",
    "monte_carlo",
    "seed",
    "transport",
    "endpoints",
    "out",
    "record_timing",
    "pcr_basis",
    "solver_delta",
];

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| field(key, format!("cannot parse '{}'", v.trim())))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    let items: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_one(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(field(key, "empty list"));
    }
    Ok(items)
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(field(key, format!("expected true/false, got '{other}'"))),
    }
}

impl ExperimentSpec {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "kind" => self.kind = ExperimentKind::from_str(v).map_err(|e| field(key, e))?,
            "d" => self.d = parse_one(key, v)?,
            "m" => self.m = parse_one(key, v)?,
            "k" => self.k = parse_list(key, v)?,
            "delta" => self.delta = parse_list(key, v)?,
            "l" => self.l = parse_list(key, v)?,
            "t" => self.t = parse_list(key, v)?,
            "t_inner" => self.t_inner = parse_list(key, v)?,
            "eta" => {
                self.eta = match v {
                    "practical" => EtaChoice::Practical,
                    "scaled" => EtaChoice::Scaled,
                    other => return Err(field(key, format!("expected practical|scaled, got '{other}'"))),
                }
            }
            "c0" => self.c0 = parse_one(key, v)?,
            "skewness" => {
                self.skewness = if v == "none" { None } else { Some(parse_one(key, v)?) }
            }
            "noise_var" => self.noise_var = parse_one(key, v)?,
            "link" => self.link = Link::from_str(v).map_err(|e| field(key, e))?,
            "monte_carlo" => self.monte_carlo = parse_one(key, v)?,
            "seed" => self.seed = parse_one(key, v)?,
            "transport" => {
                self.transport = match v {
                    "memory" => TransportChoice::Memory,
                    "tcp" => TransportChoice::Tcp,
                    other => return Err(field(key, format!("expected memory|tcp, got '{other}'"))),
                }
            }
            "endpoints" => {
                self.endpoints = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "out" => self.out = (!v.is_empty()).then(|| PathBuf::from(v)),
            "record_timing" => self.record_timing = parse_bool(key, v)?,
            "pcr_basis" => {
                self.pcr_basis = match v {
                    "gap" => PcrBasis::AssumeGap,
                    "enlarged" => PcrBasis::Enlarged,
                    other => return Err(field(key, format!("expected gap|enlarged, got '{other}'"))),
                }
            }
            "solver_delta" => self.solver_delta = parse_one(key, v)?,
            other => return Err(field(other, "unknown key")),
        }
        Ok(())
    }

    /// Applies every assignment in `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str, source_name: &str) -> Result<usize, ConfigError> {
        let mut applied = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| ConfigError::Parse {
                source_name: source_name.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| perr(format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(perr(format!("unknown key '{key}'")));
            }
            self.set(key, value).map_err(|e| perr(e.to_string()))?;
            applied += 1;
        }
        Ok(applied)
    }
}

/// Parses a complete configuration; at least one assignment is required.
pub fn parse_config_str(text: &str, source_name: &str) -> Result<ExperimentSpec, ConfigError> {
    let mut spec = ExperimentSpec::default();
    if spec.apply_text(text, source_name)? == 0 {
        return Err(ConfigError::Empty);
    }
    spec.validate()?;
    Ok(spec)
}

pub fn parse_config(path: &Path) -> Result<ExperimentSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config_str(&text, &path.display().to_string())
}

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

const FIG1: &str = "kind = vary-outer-iterations
d = 50
m = 500
k = 200
delta = 1.0
l = 1, 2, 3
t = 1, 2, 5, 10, 15, 20, 25, 30, 35, 40
t_inner = 5, 10
";

const FIG2: &str = "kind = vary-outer-iterations
d = 50
m = 500
k = 200
delta = 2.0
l = 1, 2, 3
t = 1, 2, 5, 10, 15, 20, 25, 30, 35, 40
t_inner = 5, 10
";

const FIG3: &str = "kind = vary-eigengap
d = 50
m = 500
k = 200
delta = 0.25, 0.5, 1.0, 2.0
l = 1, 2, 3
t = 40
t_inner = 10
";

const FIG4: &str = "kind = vary-machines
d = 50
m = 500
k = 100, 200, 400, 800, 1600, 3200, 6400, 12800, 25600, 51200
delta = 0.5
skewness = 4
l = 1, 2, 3
t = 200
t_inner = 10
c0 = 3
";

const FIG4_SKEW6: &str = "kind = vary-machines
d = 50
m = 500
k = 100, 200, 400, 800, 1600, 3200, 6400, 12800, 25600, 51200
delta = 0.5
skewness = 6
l = 1, 2, 3
t = 200
t_inner = 10
c0 = 3
";

const PCR: &str = "kind = pcr
d = 50
m = 500
k = 25, 50, 100, 200, 400
delta = 0.5
l = 3
t = 40
t_inner = 10
noise_var = 0.2
";

const PCR_NOISE05: &str = "kind = pcr
d = 50
m = 500
k = 25, 50, 100, 200, 400
delta = 0.5
l = 3
t = 40
t_inner = 10
noise_var = 0.5
";

const SIM_SQUARE: &str = "kind = sim
d = 50
m = 500
k = 25, 50, 100, 200, 400
l = 1
t = 40
t_inner = 10
noise_var = 0.2
link = square
";

const SIM_ABS: &str = "kind = sim
d = 50
m = 500
k = 25, 50, 100, 200, 400
l = 1
t = 40
t_inner = 10
noise_var = 0.2
link = abs
";

const SIM_MIX: &str = "kind = sim
d = 50
m = 500
k = 25, 50, 100, 200, 400
l = 1
t = 40
t_inner = 10
noise_var = 0.2
link = mix
";

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig1",
        description: "error vs outer iterations, delta = 1 (d=50, m=500, K=200)",
        text: FIG1,
    },
    Preset {
        name: "fig2",
        description: "error vs outer iterations, delta = 2",
        text: FIG2,
    },
    Preset {
        name: "fig3",
        description: "error vs eigengap, T=40, T'=10",
        text: FIG3,
    },
    Preset {
        name: "fig4",
        description: "error vs machines, skewed beta data (skewness 4), K = 100..51200, c0 = 3, T = 200",
        text: FIG4,
    },
    Preset {
        name: "fig4-skew6",
        description: "as fig4 with skewness 6",
        text: FIG4_SKEW6,
    },
    Preset {
        name: "pcr",
        description: "distributed principal component regression, noise variance 0.2",
        text: PCR,
    },
    Preset {
        name: "pcr-noise05",
        description: "distributed principal component regression, noise variance 0.5",
        text: PCR_NOISE05,
    },
    Preset {
        name: "sim-square",
        description: "single-index model, f(u) = u^2",
        text: SIM_SQUARE,
    },
    Preset {
        name: "sim-abs",
        description: "single-index model, f(u) = |u|",
        text: SIM_ABS,
    },
    Preset {
        name: "sim-mix",
        description: "single-index model, f(u) = 4u^2 + 3cos(u)",
        text: SIM_MIX,
    },
];

pub fn preset(name: &str) -> Result<ExperimentSpec, ConfigError> {
    let p = PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
    let mut spec = ExperimentSpec::default();
    spec.apply_text(p.text, p.name)?;
    spec.validate()?;
    Ok(spec)
}
