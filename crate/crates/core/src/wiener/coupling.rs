//! Coupling functions `φ: [0,T] → [0,1]` and the coupled driver
//! `W^φ = ∫ √(1−φ²) dW + ∫ φ dW'`.
//!
//! On a grid, step `k` covers `(s_k, s_{k+1}]` and uses the value `φ` takes on
//! the interior of that step (the right limit at the left node). For step
//! functions aligned with the grid this is exact, so `𝟙_(a,c]` replaces
//! precisely the increments inside `(a,c]`.

use serde::{Deserialize, Serialize};

use super::grid::TimeGrid;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingFunction {
    /// Isonormal coupling `φ ≡ r`.
    Constant { r: f64 },
    /// Cut-off coupling `φ = 𝟙_(a,c]`.
    Indicator { a: f64, c: f64 },
    /// `values[i]` on `[breakpoints[i], breakpoints[i+1])`, zero elsewhere.
    Piecewise { breakpoints: Vec<f64>, values: Vec<f64> },
}

impl CouplingFunction {
    pub fn constant(r: f64) -> Result<Self> {
        let phi = Self::Constant { r };
        phi.validate()?;
        Ok(phi)
    }

    pub fn indicator(a: f64, c: f64) -> Result<Self> {
        let phi = Self::Indicator { a, c };
        phi.validate()?;
        Ok(phi)
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let phi = Self::Piecewise { breakpoints, values };
        phi.validate()?;
        Ok(phi)
    }

    /// The identity coupling `φ ≡ 0`.
    pub fn identity() -> Self {
        Self::Constant { r: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        match self {
            Self::Constant { r } => {
                if !in_unit(*r) {
                    return Err(invalid(format!("constant coupling r = {r} outside [0,1]")));
                }
            }
            Self::Indicator { a, c } => {
                if !(a.is_finite() && c.is_finite() && *a >= 0.0 && a < c) {
                    return Err(invalid(format!("indicator coupling needs 0 <= a < c, got ({a}, {c}]")));
                }
            }
            Self::Piecewise { breakpoints, values } => {
                if breakpoints.len() != values.len() + 1 || values.is_empty() {
                    return Err(invalid("piecewise coupling needs len(breakpoints) = len(values) + 1 >= 2"));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(invalid("piecewise breakpoints must be strictly increasing"));
                }
                if let Some(v) = values.iter().find(|v| !in_unit(**v)) {
                    return Err(invalid(format!("piecewise coupling value {v} outside [0,1]")));
                }
            }
        }
        Ok(())
    }

    /// Pointwise value `φ(u)`.
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Self::Constant { r } => *r,
            Self::Indicator { a, c } => {
                if *a < u && u <= *c {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Piecewise { breakpoints, values } => breakpoints
                .windows(2)
                .zip(values)
                .find(|(w, _)| w[0] <= u && u < w[1])
                .map_or(0.0, |(_, v)| *v),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Constant { .. } => Vec::new(),
            Self::Indicator { a, c } => vec![*a, *c],
            Self::Piecewise { breakpoints, .. } => breakpoints.clone(),
        }
    }

    /// Per-step weights on `grid`. Breakpoints inside `[t0, T]` must be grid nodes.
    pub fn weights(&self, grid: &TimeGrid) -> Result<CouplingWeights> {
        self.validate()?;
        for b in self.breakpoints() {
            if b > grid.t0() && b < grid.t_end() && grid.node_index(b).is_none() {
                return Err(Error::Misaligned(format!(
                    "coupling breakpoint {b} is not a node of the grid on [{}, {}] with {} steps",
                    grid.t0(),
                    grid.t_end(),
                    grid.n_steps()
                )));
            }
        }
        let phi: Vec<f64> = (0..grid.n_steps())
            .map(|k| self.eval(0.5 * (grid.node(k) + grid.node(k + 1))))
            .collect();
        Ok(CouplingWeights::from_values(phi))
    }

    /// Indices of the steps on which `φ` is nonzero, as a half-open range
    /// `[first, last)`; `None` if `φ` vanishes on the grid.
    pub fn support_steps(&self, grid: &TimeGrid) -> Result<Option<(usize, usize)>> {
        let w = self.weights(grid)?;
        let first = w.phi.iter().position(|v| *v != 0.0);
        let last = w.phi.iter().rposition(|v| *v != 0.0);
        Ok(first.zip(last).map(|(f, l)| (f, l + 1)))
    }
}

/// `(∫_{t0}^{T} φ(u)² du)^{1/2}` in closed form.
pub fn coupling_l2_mass(phi: &CouplingFunction, t0: f64, t_end: f64) -> f64 {
    let overlap = |lo: f64, hi: f64| (hi.min(t_end) - lo.max(t0)).max(0.0);
    let sq = match phi {
        CouplingFunction::Constant { r } => r * r * (t_end - t0).max(0.0),
        CouplingFunction::Indicator { a, c } => overlap(*a, *c),
        CouplingFunction::Piecewise { breakpoints, values } => breakpoints
            .windows(2)
            .zip(values)
            .map(|(w, v)| v * v * overlap(w[0], w[1]))
            .sum(),
    };
    sq.sqrt()
}

/// `φ` and `√(1−φ²)` per grid step.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingWeights {
    pub phi: Vec<f64>,
    pub keep: Vec<f64>,
}

impl CouplingWeights {
    pub fn from_values(phi: Vec<f64>) -> Self {
        let keep = phi.iter().map(|p| (1.0 - p * p).max(0.0).sqrt()).collect();
        Self { phi, keep }
    }

    pub fn n_steps(&self) -> usize {
        self.phi.len()
    }

    pub fn is_identity(&self) -> bool {
        self.phi.iter().all(|p| *p == 0.0)
    }

    /// Coupled increments for one path; `dw`, `dwp`, `out` hold `n_steps × dim` values.
    ///
    /// Steps with `φ = 0` copy `dw` and steps with `φ = 1` copy `dwp`, so the
    /// identity and full-replacement couplings are bit-exact.
    pub fn couple_into(&self, dim: usize, dw: &[f64], dwp: &[f64], out: &mut [f64]) {
        debug_assert_eq!(dw.len(), self.n_steps() * dim);
        for (k, (phi, keep)) in self.phi.iter().zip(&self.keep).enumerate() {
            let r = k * dim..(k + 1) * dim;
            if *phi == 0.0 {
                out[r.clone()].copy_from_slice(&dw[r]);
            } else if *phi == 1.0 {
                out[r.clone()].copy_from_slice(&dwp[r]);
            } else {
                for j in r {
                    out[j] = keep * dw[j] + phi * dwp[j];
                }
            }
        }
    }
}
