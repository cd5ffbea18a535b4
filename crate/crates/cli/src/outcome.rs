use serde::{Deserialize, Serialize};
use wiener_coupling::estimators::RateFit;
use wiener_coupling::record::EstimateRecord;

/// How `measured` is compared with `expected_exponent_or_value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|measured − expected| ≤ tolerance`.
    Within,
    /// `measured ≥ expected − tolerance`.
    AtLeast,
    /// `measured ≤ expected + tolerance`.
    AtMost,
}

/// One checked assertion of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub paper_claim_id: String,
    pub description: String,
    pub relation: Relation,
    pub expected_exponent_or_value: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Claim {
    pub fn new(id: &str, description: impl Into<String>, relation: Relation, expected: f64, measured: f64, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::Within => (measured - expected).abs() <= tolerance,
            Relation::AtLeast => measured >= expected - tolerance,
            Relation::AtMost => measured <= expected + tolerance,
        };
        Self {
            paper_claim_id: id.to_string(),
            description: description.into(),
            relation,
            expected_exponent_or_value: expected,
            measured,
            tolerance,
            pass: pass && measured.is_finite(),
        }
    }

    pub fn within(id: &str, description: impl Into<String>, expected: f64, measured: f64, tolerance: f64) -> Self {
        Self::new(id, description, Relation::Within, expected, measured, tolerance)
    }

    pub fn at_least(id: &str, description: impl Into<String>, bound: f64, measured: f64, slack: f64) -> Self {
        Self::new(id, description, Relation::AtLeast, bound, measured, slack)
    }

    pub fn at_most(id: &str, description: impl Into<String>, bound: f64, measured: f64, slack: f64) -> Self {
        Self::new(id, description, Relation::AtMost, bound, measured, slack)
    }

    /// A yes/no check reported as `measured ∈ {0, 1}` against 1.
    pub fn flag(id: &str, description: impl Into<String>, ok: bool) -> Self {
        Self::within(id, description, 1.0, if ok { 1.0 } else { 0.0 }, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: RateFit,
}

/// Records, claims and rate fits produced by one experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub records: Vec<EstimateRecord>,
    pub claims: Vec<Claim>,
    pub rate_fits: Vec<NamedFit>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    pub fn fit(&mut self, name: impl Into<String>, fit: RateFit) -> &RateFit {
        self.rate_fits.push(NamedFit { name: name.into(), fit });
        &self.rate_fits.last().expect("just pushed").fit
    }
}
