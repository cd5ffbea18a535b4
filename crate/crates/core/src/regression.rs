//! Ridge-regularized polynomial regression on a scalar state.
//!
//! The basis is `He_0, …, He_m` (probabilists' Hermite) of the standardized
//! state, which keeps the Gram matrix well conditioned for roughly Gaussian
//! states. The ridge penalty is `1e−8 · n`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chaos::hermite;
use crate::error::{Error, Result};
use crate::par;

pub const RIDGE_FACTOR: f64 = 1e-8;
/// Gram matrices with a larger condition number are reported as rank deficient.
pub const MAX_CONDITION: f64 = 1e12;
const CHUNK: usize = 4096;

/// A fitted design: standardization, Cholesky factor of the Gram matrix.
#[derive(Debug, Clone)]
pub struct Design {
    mean: f64,
    scale: f64,
    degree: usize,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDiagnostics {
    pub node: usize,
    pub degree: usize,
    pub condition: f64,
}

impl Design {
    /// Build the design for `x`; a constant state reduces the basis to degree 0.
    pub fn new(x: &[f64], degree: usize, node: usize) -> Result<Self> {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let (scale, degree) = if var > 1e-24 * (1.0 + mean * mean) { (var.sqrt(), degree) } else { (1.0, 0) };
        let m = degree + 1;
        let partial = par::map_paths(
            x.len().div_ceil(CHUNK),
            || vec![0.0; m],
            |row, c| {
                let mut g = vec![0.0; m * m];
                for &v in &x[c * CHUNK..((c + 1) * CHUNK).min(x.len())] {
                    basis((v - mean) / scale, row);
                    for i in 0..m {
                        for j in 0..=i {
                            g[i * m + j] += row[i] * row[j];
                        }
                    }
                }
                g
            },
        );
        let mut gram = DMatrix::<f64>::zeros(m, m);
        for g in partial {
            for i in 0..m {
                for j in 0..=i {
                    gram[(i, j)] += g[i * m + j];
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                gram[(j, i)] = gram[(i, j)];
            }
            gram[(i, i)] += RIDGE_FACTOR * n;
        }
        let eig = gram.clone().symmetric_eigenvalues();
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(*e), hi.max(*e)));
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if condition > MAX_CONDITION {
            return Err(Error::RankDeficient { node, condition });
        }
        let chol = gram.cholesky().ok_or(Error::RankDeficient { node, condition })?;
        Ok(Self { mean, scale, degree, chol, condition })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Least-squares coefficients for target `y`.
    pub fn fit(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let m = self.degree + 1;
        let partial = par::map_paths(
            x.len().div_ceil(CHUNK),
            || vec![0.0; m],
            |row, c| {
                let mut b = vec![0.0; m];
                let range = c * CHUNK..((c + 1) * CHUNK).min(x.len());
                for (v, t) in x[range.clone()].iter().zip(&y[range]) {
                    basis((v - self.mean) / self.scale, row);
                    for i in 0..m {
                        b[i] += row[i] * t;
                    }
                }
                b
            },
        );
        let mut rhs = DVector::<f64>::zeros(m);
        for b in partial {
            for i in 0..m {
                rhs[i] += b[i];
            }
        }
        self.chol.solve(&rhs).iter().copied().collect()
    }

    #[inline]
    pub fn eval(&self, coef: &[f64], x: f64) -> f64 {
        let z = (x - self.mean) / self.scale;
        coef.iter().enumerate().map(|(k, c)| c * hermite(k as u32, z)).sum()
    }

    /// Fitted values at every sample.
    pub fn predict(&self, coef: &[f64], x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| self.eval(coef, *v)).collect()
    }

    pub fn diagnostics(&self, node: usize) -> RegressionDiagnostics {
        RegressionDiagnostics { node, degree: self.degree, condition: self.condition }
    }
}

fn basis(z: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = z;
    }
    for k in 2..out.len() {
        out[k] = z * out[k - 1] - (k - 1) as f64 * out[k - 2];
    }
}

/// Fitted `E[y | x]` at the samples.
pub fn regress(x: &[f64], y: &[f64], degree: usize, node: usize) -> Result<Vec<f64>> {
    let design = Design::new(x, degree, node)?;
    let coef = design.fit(x, y);
    Ok(design.predict(&coef, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_polynomials() {
        let x: Vec<f64> = (0..500).map(|i| (i as f64 / 50.0).sin() * 2.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v - 0.5 * v * v).collect();
        let fit = regress(&x, &y, 3, 0).unwrap();
        for (a, b) in fit.iter().zip(&y) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_state_gives_the_mean() {
        let x = vec![2.0; 10];
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let fit = regress(&x, &y, 3, 0).unwrap();
        assert!(fit.iter().all(|v| (v - 4.5).abs() < 1e-6));
    }
}
