use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sde::PathEnsemble;
use crate::stats::batch_mean;

/// Monte Carlo estimate of `‖Y‖_{L_p} = (E|Y|^p)^{1/p}`.
///
/// The standard error comes from batch means of `|Y|^p` and the delta method.
/// For `p < 1` this is the quasi-norm. `p = ∞` is used for essential-supremum
/// estimates, which carry no standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpEstimate {
    pub p: f64,
    pub value: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl LpEstimate {
    pub fn from_samples(values: &[f64], p: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(invalid(format!("integrability exponent p = {p} must be positive")));
        }
        if values.is_empty() {
            return Err(invalid("no samples"));
        }
        if p.is_infinite() {
            let value = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            return Ok(Self { p, value, std_error: 0.0, n_paths: values.len() });
        }
        let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
        let m = batch_mean(&powered);
        let value = m.mean.powf(1.0 / p);
        let std_error = if m.mean > 0.0 { m.std_error * value / (p * m.mean) } else { 0.0 };
        Ok(Self { p, value, std_error, n_paths: values.len() })
    }

    /// `self / divisor` for a deterministic divisor.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { value: self.value * factor, std_error: self.std_error * factor.abs(), ..*self }
    }
}

/// `‖max_k |X_k − X'_k|‖_{L_p}` over the nodes of two ensembles on the same grid.
pub fn lp_sup_distance(x: &PathEnsemble, xp: &PathEnsemble, p: f64) -> Result<LpEstimate> {
    if x.grid != xp.grid || x.n_paths != xp.n_paths || x.d != xp.d {
        return Err(Error::Mismatch("ensembles differ in grid, path count or state dimension".into()));
    }
    if x.provenance.seed.is_some() && xp.provenance.seed.is_some() && x.provenance.seed != xp.provenance.seed {
        return Err(Error::Mismatch("ensembles were generated from different seeds".into()));
    }
    let d = x.d;
    let sups: Vec<f64> = (0..x.n_paths)
        .map(|i| {
            x.path(i)
                .chunks(d)
                .zip(xp.path(i).chunks(d))
                .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
                .fold(0.0, f64::max)
        })
        .collect();
    LpEstimate::from_samples(&sups, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples() {
        let e = LpEstimate::from_samples(&[1.0; 50], 3.0).unwrap();
        assert_eq!((e.value, e.std_error), (1.0, 0.0));
        let z = LpEstimate::from_samples(&[0.0; 50], 2.0).unwrap();
        assert_eq!((z.value, z.std_error), (0.0, 0.0));
        assert!(LpEstimate::from_samples(&[1.0], 0.0).is_err());
    }

    #[test]
    fn quasi_norm_below_one() {
        let e = LpEstimate::from_samples(&[1.0, 4.0], 0.5).unwrap();
        assert!((e.value - 2.25).abs() < 1e-15);
    }
}
