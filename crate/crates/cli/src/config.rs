use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wiener_coupling::wiener::CouplingFunction;

use crate::CliError;

/// Time grid `[t0, t_end]` with `n_steps` equal steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

/// Couplings to sweep over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    /// Intervals of length `2^{−k}`, `k_min ≤ k ≤ k_max`, attached at `anchor`
    /// (the experiment's listing says which end).
    Dyadic { anchor: f64, k_min: u32, k_max: u32 },
    /// An explicit list of coupling functions.
    Couplings { phi: Vec<CouplingFunction> },
}

/// Everything a run needs. Only `experiment` and `seed` are mandatory; every
/// other field falls back to the experiment's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Optional config fields, used to reject fields an experiment ignores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Preset,
    Params,
    Grid,
    NPaths,
    Sweep,
    P,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Preset => "preset",
            Field::Params => "params",
            Field::Grid => "grid",
            Field::NPaths => "n_paths",
            Field::Sweep => "sweep",
            Field::P => "p",
        }
    }
}

impl ExperimentConfig {
    pub fn new(experiment: impl Into<String>, seed: u64) -> Self {
        Self {
            experiment: experiment.into(),
            seed,
            preset: None,
            params: BTreeMap::new(),
            grid: None,
            n_paths: None,
            sweep: None,
            p: None,
            output: None,
        }
    }

    /// Parse JSON text. A `seed_override` fills in or replaces `seed`.
    pub fn from_json(text: &str, seed_override: Option<u64>) -> Result<Self, CliError> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        if let Some(seed) = seed_override {
            match value.as_object_mut() {
                Some(obj) => {
                    obj.insert("seed".into(), seed.into());
                }
                None => return Err(CliError::Config("config must be a JSON object".into())),
            }
        }
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &Path, seed_override: Option<u64>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text, seed_override)
    }

    /// Optional fields that are set.
    pub fn fields_present(&self) -> Vec<Field> {
        let mut out = Vec::new();
        if self.preset.is_some() {
            out.push(Field::Preset);
        }
        if !self.params.is_empty() {
            out.push(Field::Params);
        }
        if self.grid.is_some() {
            out.push(Field::Grid);
        }
        if self.n_paths.is_some() {
            out.push(Field::NPaths);
        }
        if self.sweep.is_some() {
            out.push(Field::Sweep);
        }
        if self.p.is_some() {
            out.push(Field::P);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_seed_is_named() {
        let err = ExperimentConfig::from_json(r#"{"experiment": "chaos-identity"}"#, None).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn seed_override_fills_the_gap() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "gr-lemma"}"#, Some(5)).unwrap();
        assert_eq!(c.seed, 5);
    }

    #[test]
    fn full_config_round_trips() {
        let text = r#"{
            "experiment": "lipschitz-rate", "seed": 3, "preset": "linear",
            "params": {"mu": 0.1}, "grid": {"t_end": 1.0, "n_steps": 256},
            "n_paths": 100, "sweep": {"kind": "dyadic", "anchor": 0.0, "k_min": 2, "k_max": 4},
            "p": [2.0]
        }"#;
        let c = ExperimentConfig::from_json(text, None).unwrap();
        assert_eq!(c.grid.unwrap().n_steps, 256);
        assert_eq!(c.sweep, Some(Sweep::Dyadic { anchor: 0.0, k_min: 2, k_max: 4 }));
        let again = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap(), None).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"experiment": "x", "seed": 1, "paths": 3}"#, None).is_err());
    }
}
