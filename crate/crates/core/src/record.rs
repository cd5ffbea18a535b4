use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::estimators::LpEstimate;

/// Flat, serializable form of any estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    /// Integrability exponent, if the estimate is an `L_p` norm.
    pub p: Option<f64>,
    pub value: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl EstimateRecord {
    pub fn new(name: impl Into<String>, value: f64, std_error: f64, n_paths: usize, seed: u64) -> Self {
        Self { name: name.into(), parameters: BTreeMap::new(), p: None, value, std_error, n_paths, seed }
    }

    pub fn from_lp(name: impl Into<String>, e: &LpEstimate, seed: u64) -> Self {
        Self { p: Some(e.p), ..Self::new(name, e.value, e.std_error, e.n_paths, seed) }
    }

    pub fn with(mut self, key: impl Into<String>, value: f64) -> Self {
        self.parameters.insert(key.into(), value);
        self
    }
}
