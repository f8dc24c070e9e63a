//! Run configuration: a flat `key = value` text format (one pair per line,
//! `#` comments) with a JSON alternative. JSON summaries emitted by the
//! runner embed the configuration under a `"config"` key, so a summary file
//! can be fed back in as a config and reproduces the same run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {value:?} ({reason})")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("missing required key {0:?}")]
    MissingKey(&'static str),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("json config: {0}")]
    Json(String),
}

/// One run of the simulator, as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// A | B | C | D | kitaev-fermion
    pub regime: String,
    pub total_sites: usize,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_left: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_right: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_cavity: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_stokes: Option<bool>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing_left: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing_right: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_eff: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_hop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ipr_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_fraction: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_site: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_times: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_end: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_parameter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_points: Option<usize>,
}

impl RunConfig {
    fn empty() -> Self {
        RunConfig {
            regime: String::new(),
            total_sites: 0,
            g_left: None,
            g_right: None,
            t_cavity: None,
            kappa1: None,
            kappa2: None,
            kappa3: None,
            kappa4: None,
            residual_stokes: None,
            g_c: None,
            pairing_left: None,
            pairing_right: None,
            t_eff: None,
            t_hop: None,
            delta: None,
            gap_window: None,
            ipr_threshold: None,
            edge_fraction: None,
            initial_site: None,
            t_max: None,
            num_times: None,
            window_start: None,
            window_end: None,
            lambda: None,
            gamma: None,
            phi: None,
            nu_list: None,
            t_end: None,
            sweep_parameter: None,
            sweep_start: None,
            sweep_stop: None,
            sweep_points: None,
        }
    }

    /// Parses either the flat text format or JSON (a bare config object, or
    /// any object with a `"config"` member, e.g. an emitted summary).
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg = if text.trim_start().starts_with('{') {
            Self::parse_json(text)?
        } else {
            Self::parse_flat(text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn parse_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        let obj = match value.get("config") {
            Some(inner) => inner.clone(),
            None => value,
        };
        serde_json::from_value(obj).map_err(|e| ConfigError::Json(e.to_string()))
    }

    fn parse_flat(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::empty();
        let mut saw_regime = false;
        let mut saw_sites = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Malformed {
                line: line_no,
                text: line.to_string(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |reason: &str| ConfigError::BadValue {
                line: line_no,
                key: key.to_string(),
                value: value.to_string(),
                reason: reason.to_string(),
            };
            let f = || value.parse::<f64>().map_err(|e| bad(&e.to_string()));
            let u = || value.parse::<usize>().map_err(|e| bad(&e.to_string()));
            match key {
                "regime" => {
                    cfg.regime = value.to_string();
                    saw_regime = true;
                }
                "total_sites" => {
                    cfg.total_sites = u()?;
                    saw_sites = true;
                }
                "g_left" => cfg.g_left = Some(f()?),
                "g_right" => cfg.g_right = Some(f()?),
                "t_cavity" => cfg.t_cavity = Some(f()?),
                "kappa1" => cfg.kappa1 = Some(f()?),
                "kappa2" => cfg.kappa2 = Some(f()?),
                "kappa3" => cfg.kappa3 = Some(f()?),
                "kappa4" => cfg.kappa4 = Some(f()?),
                "residual_stokes" => {
                    cfg.residual_stokes =
                        Some(value.parse::<bool>().map_err(|e| bad(&e.to_string()))?)
                }
                "g_c" => cfg.g_c = Some(f()?),
                "pairing_left" => cfg.pairing_left = Some(f()?),
                "pairing_right" => cfg.pairing_right = Some(f()?),
                "t_eff" => cfg.t_eff = Some(f()?),
                "t_hop" => cfg.t_hop = Some(f()?),
                "delta" => cfg.delta = Some(f()?),
                "gap_window" => cfg.gap_window = Some(f()?),
                "ipr_threshold" => cfg.ipr_threshold = Some(f()?),
                "edge_fraction" => cfg.edge_fraction = Some(f()?),
                "initial_site" => cfg.initial_site = Some(u()?),
                "t_max" => cfg.t_max = Some(f()?),
                "num_times" => cfg.num_times = Some(u()?),
                "window_start" => cfg.window_start = Some(f()?),
                "window_end" => cfg.window_end = Some(f()?),
                "lambda" => cfg.lambda = Some(f()?),
                "gamma" => cfg.gamma = Some(f()?),
                "phi" => cfg.phi = Some(f()?),
                "nu_list" => {
                    let parsed: Result<Vec<f64>, _> = value
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect();
                    cfg.nu_list = Some(parsed.map_err(|e| bad(&e.to_string()))?);
                }
                "t_end" => cfg.t_end = Some(f()?),
                "sweep_parameter" => cfg.sweep_parameter = Some(value.to_string()),
                "sweep_start" => cfg.sweep_start = Some(f()?),
                "sweep_stop" => cfg.sweep_stop = Some(f()?),
                "sweep_points" => cfg.sweep_points = Some(u()?),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line: line_no,
                        key: key.to_string(),
                    })
                }
            }
        }
        if !saw_regime {
            return Err(ConfigError::MissingKey("regime"));
        }
        if !saw_sites {
            return Err(ConfigError::MissingKey("total_sites"));
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.regime.as_str() {
            "A" | "B" | "C" | "D" | "kitaev-fermion" => {}
            other => {
                return Err(ConfigError::Invalid(format!(
                    "regime must be A, B, C, D, or kitaev-fermion, got {other:?}"
                )))
            }
        }
        if self.total_sites < 2 {
            return Err(ConfigError::Invalid(format!(
                "total_sites must be at least 2, got {}",
                self.total_sites
            )));
        }
        let sweep_bits = [
            self.sweep_parameter.is_some(),
            self.sweep_start.is_some(),
            self.sweep_stop.is_some(),
            self.sweep_points.is_some(),
        ];
        let set = sweep_bits.iter().filter(|b| **b).count();
        if set != 0 && set != 4 {
            return Err(ConfigError::Invalid(
                "sweep axis needs all of sweep_parameter, sweep_start, sweep_stop, sweep_points"
                    .to_string(),
            ));
        }
        if let Some(p) = self.sweep_points {
            if p < 2 {
                return Err(ConfigError::Invalid(format!(
                    "sweep_points must be at least 2, got {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn has_sweep(&self) -> bool {
        self.sweep_parameter.is_some()
    }

    pub fn require_f64(&self, key: &'static str, v: Option<f64>) -> Result<f64, ConfigError> {
        v.ok_or(ConfigError::MissingKey(key))
    }
}
