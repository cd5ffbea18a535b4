//! Least-squares Monte Carlo for Markovian BSDEs
//! `Y_s = g(X_T) + ∫_s^T f(u, X_u, Y_u, Z_u) du − ∫_s^T Z_u dW_u` with scalar `X`, `W`.
//!
//! Backward step from node `k+1` to `k` (`h` the step, `ΔW_k` the driver increment):
//!
//! ```text
//! Ŷ_k = E[Y_{k+1} | X_k]
//! Z_k = E[(Y_{k+1} − Ŷ_k) ΔW_k | X_k] / h
//! Y_k = Ŷ_k + h f(s_k, X_k, Ŷ_k + h f(s_k, X_k, Ŷ_k, Z_k), Z_k)
//! ```
//!
//! i.e. the explicit value followed by one Picard iteration of the implicit
//! equation in `y`, which contracts because `L_Y h < 1` is enforced.
//! Conditional expectations are polynomial regressions on `X_k`. Subtracting
//! `Ŷ_k` before regressing for `Z` is a control variate; it does not change the
//! conditional expectation.

use std::sync::Arc;


use crate::error::{invalid, Error, Result};
use crate::estimators::LpEstimate;
use crate::regression::{Design, RegressionDiagnostics};
use crate::sde::PathEnsemble;
use crate::wiener::TimeGrid;

pub const DEFAULT_DEGREE: usize = 3;

type Generator = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;
type Terminal = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Generator `f(s, x, y, z)` with Lipschitz constants in `(y, z)` and terminal `g(x)`.
#[derive(Clone)]
pub struct BsdeModel {
    pub name: String,
    generator: Generator,
    terminal: Terminal,
    pub l_y: f64,
    pub l_z: f64,
    /// Hölder exponent `α` of `g` and of `f` in `x`.
    pub alpha: f64,
    pub g_holder: f64,
    pub f_holder_x: f64,
}

impl std::fmt::Debug for BsdeModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BsdeModel")
            .field("name", &self.name)
            .field("l_y", &self.l_y)
            .field("l_z", &self.l_z)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl BsdeModel {
    /// `delta` is the superlinear growth exponent of the driver in `z`; only
    /// `delta = 0` (Lipschitz drivers) is supported.
    pub fn new(
        name: impl Into<String>,
        generator: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
        terminal: impl Fn(f64) -> f64 + Send + Sync + 'static,
        l_y: f64,
        l_z: f64,
        delta: f64,
    ) -> Result<Self> {
        if delta != 0.0 {
            return Err(invalid(format!("only Lipschitz drivers (delta = 0) are supported, got delta = {delta}")));
        }
        if !(l_y >= 0.0 && l_z >= 0.0) {
            return Err(invalid("Lipschitz constants must be nonnegative"));
        }
        Ok(Self {
            name: name.into(),
            generator: Arc::new(generator),
            terminal: Arc::new(terminal),
            l_y,
            l_z,
            alpha: 1.0,
            g_holder: 1.0,
            f_holder_x: 0.0,
        })
    }

    pub fn with_holder(mut self, alpha: f64, g_holder: f64, f_holder_x: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("Hölder exponent alpha = {alpha} outside (0,1]")));
        }
        self.alpha = alpha;
        self.g_holder = g_holder;
        self.f_holder_x = f_holder_x;
        Ok(self)
    }

    /// `f ≡ 0`, `g(x) = x`.
    pub fn identity() -> Self {
        Self::new("identity", |_, _, _, _| 0.0, |x| x, 0.0, 0.0, 0.0).expect("valid")
    }

    /// `f(y) = −λy`, `g(x) = x`.
    pub fn linear_discount(lambda: f64) -> Self {
        Self::new("linear_discount", move |_, _, y, _| -lambda * y, |x| x, lambda.abs(), 0.0, 0.0).expect("valid")
    }

    /// `f ≡ 0`, `g ≡ value`.
    pub fn constant(value: f64) -> Self {
        Self::new("constant", |_, _, _, _| 0.0, move |_| value, 0.0, 0.0, 0.0)
            .expect("valid")
            .with_holder(1.0, 0.0, 0.0)
            .expect("valid")
    }

    #[inline]
    pub fn f(&self, s: f64, x: f64, y: f64, z: f64) -> f64 {
        (self.generator)(s, x, y, z)
    }

    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        (self.terminal)(x)
    }
}

/// `Y` on all nodes and `Z` on all steps, stored node-major: `y[k · n_paths + i]`.
#[derive(Debug, Clone)]
pub struct BsdeSolution {
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub degree: usize,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub diagnostics: Vec<RegressionDiagnostics>,
    fits: Vec<NodeFit>,
}

#[derive(Debug, Clone)]
struct NodeFit {
    design: Design,
    coef_y: Vec<f64>,
    coef_z: Vec<f64>,
}

impl BsdeSolution {
    pub fn y_at(&self, k: usize) -> &[f64] {
        &self.y[k * self.n_paths..(k + 1) * self.n_paths]
    }

    pub fn z_at(&self, k: usize) -> &[f64] {
        &self.z[k * self.n_paths..(k + 1) * self.n_paths]
    }

    /// The solution written as functions of the state, `Y_k = y_k(X_k)` and
    /// `Z_k = z_k(X_k)`, evaluated on another ensemble (e.g. a coupled one).
    /// Using the same fitted functions for `X` and `X^φ` keeps the regression
    /// error common to both solutions.
    pub fn evaluate_on(&self, model: &BsdeModel, x: &PathEnsemble) -> Result<BsdeSolution> {
        if x.grid != self.grid || x.d != 1 {
            return Err(Error::Mismatch("ensemble grid differs from the solution grid".into()));
        }
        let (n, nodes) = (x.n_paths, self.grid.n_nodes());
        let h = self.grid.step();
        let mut y = vec![0.0; nodes * n];
        let mut z = vec![0.0; self.grid.n_steps() * n];
        for i in 0..n {
            y[(nodes - 1) * n + i] = model.g(x.path(i)[nodes - 1]);
        }
        for (k, fit) in self.fits.iter().enumerate() {
            let s = self.grid.node(k);
            for i in 0..n {
                let xk = x.path(i)[k];
                let yh = fit.design.eval(&fit.coef_y, xk);
                let zk = fit.design.eval(&fit.coef_z, xk);
                z[k * n + i] = zk;
                y[k * n + i] = picard(model, s, xk, yh, zk, h);
            }
        }
        Ok(BsdeSolution { y, z, n_paths: n, ..self.clone() })
    }
}

#[inline]
fn picard(model: &BsdeModel, s: f64, x: f64, yh: f64, z: f64, h: f64) -> f64 {
    let y0 = yh + h * model.f(s, x, yh, z);
    yh + h * model.f(s, x, y0, z)
}

/// Solve backward along scalar forward paths `x`, with `increments` the driver
/// increments of the same paths, row-major `[path][step]`.
pub fn lsmc_solve(model: &BsdeModel, x: &PathEnsemble, increments: &[f64], degree: usize) -> Result<BsdeSolution> {
    if degree == 0 {
        return Err(invalid("basis degree must be at least 1"));
    }
    if x.d != 1 {
        return Err(invalid("the BSDE solver supports scalar forward states only"));
    }
    let grid = x.grid.clone();
    let (n, steps, nodes) = (x.n_paths, grid.n_steps(), grid.n_nodes());
    if increments.len() != n * steps {
        return Err(Error::Mismatch(format!(
            "{} driver increments for {n} paths of {steps} steps",
            increments.len()
        )));
    }
    let h = grid.step();
    if model.l_y * h >= 1.0 {
        return Err(invalid(format!("need L_Y h < 1, got {}", model.l_y * h)));
    }
    let column = |k: usize| -> Vec<f64> { (0..n).map(|i| x.path(i)[k]).collect() };
    let mut y = vec![0.0; nodes * n];
    let mut z = vec![0.0; steps * n];
    let last = column(steps);
    for i in 0..n {
        y[steps * n + i] = model.g(last[i]);
    }
    let mut fits = Vec::with_capacity(steps);
    let mut diagnostics = Vec::with_capacity(steps);
    for k in (0..steps).rev() {
        let xk = column(k);
        let design = Design::new(&xk, degree, k)?;
        let next = &y[(k + 1) * n..(k + 2) * n];
        let coef_y = design.fit(&xk, next);
        let yh = design.predict(&coef_y, &xk);
        let target: Vec<f64> = (0..n).map(|i| (next[i] - yh[i]) * increments[i * steps + k] / h).collect();
        let coef_z = design.fit(&xk, &target);
        let s = grid.node(k);
        for i in 0..n {
            let zk = design.eval(&coef_z, xk[i]);
            let v = picard(model, s, xk[i], yh[i], zk, h);
            if !(v.is_finite() && zk.is_finite()) {
                return Err(Error::NonFinite { path: i, step: k });
            }
            z[k * n + i] = zk;
            y[k * n + i] = v;
        }
        diagnostics.push(design.diagnostics(k));
        fits.push(NodeFit { design, coef_y, coef_z });
    }
    fits.reverse();
    diagnostics.reverse();
    Ok(BsdeSolution { grid, n_paths: n, degree, y, z, diagnostics, fits })
}

/// `‖sup_k |Y^φ_k − Y_k|‖_{L_p}` and `‖(Σ_k |Z^φ_k − Z_k|² h)^{1/2}‖_{L_p}`.
pub fn bsde_coupling_distance(sol: &BsdeSolution, sol_phi: &BsdeSolution, p: f64) -> Result<(LpEstimate, LpEstimate)> {
    if sol.grid != sol_phi.grid || sol.n_paths != sol_phi.n_paths {
        return Err(Error::Mismatch("BSDE solutions differ in grid or path count".into()));
    }
    let (n, h) = (sol.n_paths, sol.grid.step());
    let mut ysup = vec![0.0f64; n];
    let mut zsq = vec![0.0f64; n];
    for k in 0..sol.grid.n_nodes() {
        for (i, (a, b)) in sol.y_at(k).iter().zip(sol_phi.y_at(k)).enumerate() {
            ysup[i] = ysup[i].max((a - b).abs());
        }
    }
    for k in 0..sol.grid.n_steps() {
        for (i, (a, b)) in sol.z_at(k).iter().zip(sol_phi.z_at(k)).enumerate() {
            zsq[i] += (a - b).powi(2) * h;
        }
    }
    let zn: Vec<f64> = zsq.iter().map(|v| v.sqrt()).collect();
    Ok((LpEstimate::from_samples(&ysup, p)?, LpEstimate::from_samples(&zn, p)?))
}

/// `‖sup_{s∈[a,c]} |Y_s − Y_a|‖_{L_p}` and `‖(∫_a^c |Z_s|² ds)^{1/2}‖_{L_p}`.
pub fn bsde_variation(sol: &BsdeSolution, a: f64, c: f64, p: f64) -> Result<(LpEstimate, LpEstimate)> {
    let (ka, kc) = match (sol.grid.node_index(a), sol.grid.node_index(c)) {
        (Some(i), Some(j)) if i < j => (i, j),
        _ => return Err(Error::Misaligned(format!("interval ({a}, {c}] is not a pair of grid nodes"))),
    };
    let (n, h) = (sol.n_paths, sol.grid.step());
    let ya = sol.y_at(ka);
    let mut ysup = vec![0.0f64; n];
    let mut zsq = vec![0.0f64; n];
    for k in ka..=kc {
        for (i, v) in sol.y_at(k).iter().enumerate() {
            ysup[i] = ysup[i].max((v - ya[i]).abs());
        }
    }
    for k in ka..kc {
        for (i, v) in sol.z_at(k).iter().enumerate() {
            zsq[i] += v * v * h;
        }
    }
    let zn: Vec<f64> = zsq.iter().map(|v| v.sqrt()).collect();
    Ok((LpEstimate::from_samples(&ysup, p)?, LpEstimate::from_samples(&zn, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_superlinear_drivers() {
        assert!(BsdeModel::new("q", |_, _, _, z| z * z, |x| x, 0.0, 1.0, 1.0).is_err());
        assert!(BsdeModel::identity().with_holder(1.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn lipschitz_spot_check() {
        let m = BsdeModel::linear_discount(2.0);
        for (y1, y2) in [(0.3, -1.2), (5.0, 4.0), (-2.0, 7.5)] {
            assert!((m.f(0.0, 0.0, y1, 0.0) - m.f(0.0, 0.0, y2, 0.0)).abs() <= m.l_y * (y1 - y2).abs() + 1e-15);
        }
    }
}
