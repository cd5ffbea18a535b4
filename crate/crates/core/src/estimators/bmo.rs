//! `BMO(S₂)` norms `sup_s ‖E(∫_s^T C_u² du | F_s)‖_{L_∞}^{1/2}` and the
//! Fefferman-type bound `‖∫|A C| ds‖_p ≤ √(2p) ‖(∫A² ds)^{1/2}‖_p ‖C‖_{BMO(S₂)}`.
//!
//! Processes are given nodewise, row-major `[path][node]`. Time integrals from
//! node `k` use the right-endpoint rule `Σ_{j>k} (·)_j h`, which is exact for
//! constants and for indicators `𝟙_{s ≤ m}` with `m` on the grid.

use serde::{Deserialize, Serialize};

use super::lp::LpEstimate;
use crate::error::{invalid, Error, Result};
use crate::regression::Design;
use crate::wiener::TimeGrid;

/// How conditional expectations given `F_s` are formed.
#[derive(Debug, Clone, Copy)]
pub enum Conditioner<'a> {
    /// `C` is the same on every path; conditional expectations are exact.
    Deterministic,
    /// `C` is Markov in this scalar state (same layout as `C`); conditional
    /// expectations come from polynomial regression of the given degree.
    MarkovState { state: &'a [f64], degree: usize },
}

fn check_shape(values: &[f64], grid: &TimeGrid) -> Result<usize> {
    let nodes = grid.n_nodes();
    if values.is_empty() || values.len() % nodes != 0 {
        return Err(Error::Mismatch(format!("process values do not form rows of {nodes} nodes")));
    }
    Ok(values.len() / nodes)
}

/// `‖C‖_{BMO(S₂)}`. With a Markov conditioner the essential supremum is the
/// maximum over paths of the fitted conditional values, an underestimate; the
/// returned estimate has `p = ∞` and zero standard error.
pub fn bmo_s2_norm(c: &[f64], grid: &TimeGrid, conditioner: Conditioner<'_>) -> Result<LpEstimate> {
    let n_paths = check_shape(c, grid)?;
    let nodes = grid.n_nodes();
    let h = grid.step();
    let row = |i: usize| &c[i * nodes..(i + 1) * nodes];
    let tail_sums = |r: &[f64]| {
        let mut out = vec![0.0; nodes];
        for k in (0..nodes - 1).rev() {
            out[k] = out[k + 1] + r[k + 1] * r[k + 1] * h;
        }
        out
    };
    let sup = match conditioner {
        Conditioner::Deterministic => {
            if (1..n_paths).any(|i| row(i) != row(0)) {
                return Err(invalid("C varies across paths; pass a Markov-state conditioner"));
            }
            tail_sums(row(0)).into_iter().fold(0.0, f64::max)
        }
        Conditioner::MarkovState { state, degree } => {
            if state.len() != c.len() {
                return Err(Error::Mismatch("conditioner state and C differ in shape".into()));
            }
            let tails: Vec<Vec<f64>> = (0..n_paths).map(|i| tail_sums(row(i))).collect();
            let mut sup = 0.0f64;
            for k in 0..nodes - 1 {
                let x: Vec<f64> = (0..n_paths).map(|i| state[i * nodes + k]).collect();
                let y: Vec<f64> = tails.iter().map(|t| t[k]).collect();
                let design = Design::new(&x, degree, k)?;
                let coef = design.fit(&x, &y);
                let best = x.iter().map(|v| design.eval(&coef, *v)).fold(0.0, f64::max);
                sup = sup.max(best);
            }
            sup
        }
    };
    Ok(LpEstimate { p: f64::INFINITY, value: sup.sqrt(), std_error: 0.0, n_paths })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeffermanReport {
    pub p: f64,
    pub lhs: LpEstimate,
    /// `‖(∫A²)^{1/2}‖_p`.
    pub square_function: LpEstimate,
    pub bmo: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    /// `rhs + 3·√(se_lhs² + se_rhs²) − lhs`.
    pub margin: f64,
    pub holds: bool,
}

pub fn fefferman_check(a: &[f64], c: &[f64], grid: &TimeGrid, p: f64, conditioner: Conditioner<'_>) -> Result<FeffermanReport> {
    let n_paths = check_shape(a, grid)?;
    if a.len() != c.len() {
        return Err(Error::Mismatch("A and C differ in shape".into()));
    }
    if !(p >= 1.0) || p.is_infinite() {
        return Err(invalid(format!("Fefferman check needs finite p >= 1, got {p}")));
    }
    let nodes = grid.n_nodes();
    let h = grid.step();
    let mut lhs_samples = Vec::with_capacity(n_paths);
    let mut sq_samples = Vec::with_capacity(n_paths);
    for i in 0..n_paths {
        let ra = &a[i * nodes..(i + 1) * nodes];
        let rc = &c[i * nodes..(i + 1) * nodes];
        lhs_samples.push((1..nodes).map(|k| (ra[k] * rc[k]).abs() * h).sum::<f64>());
        sq_samples.push((1..nodes).map(|k| ra[k] * ra[k] * h).sum::<f64>().sqrt());
    }
    let lhs = LpEstimate::from_samples(&lhs_samples, p)?;
    let square_function = LpEstimate::from_samples(&sq_samples, p)?;
    let bmo = bmo_s2_norm(c, grid, conditioner)?.value;
    let factor = (2.0 * p).sqrt() * bmo;
    let rhs = factor * square_function.value;
    let rhs_se = factor * square_function.std_error;
    let margin = rhs + 3.0 * (lhs.std_error.powi(2) + rhs_se.powi(2)).sqrt() - lhs.value;
    Ok(FeffermanReport { p, lhs, square_function, bmo, rhs, rhs_se, margin, holds: margin >= 0.0 })
}
