//! Euler–Maruyama for single and coupled SDEs under common random numbers.
//!
//! `X_{k+1} = X_k + b(s_k, X_k, aux_k) h + σ(s_k, X_k, aux_k) ΔW_k`.
//!
//! [`coupled_sweep`] streams paths: each worker regenerates the increments of
//! one path, solves `X` once and `X^φ` for every scenario, and keeps only the
//! per-path distances. [`euler_solve`] and [`coupled_solve`] store full
//! ensembles and are meant for moderate sizes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::model::{Aux, SdeModel};
use crate::error::{invalid, Error, Result};
use crate::par;
use crate::wiener::{BrownianBundle, BrownianCopy, CouplingFunction, CouplingWeights, TimeGrid};

type PrefixFn = Arc<dyn Fn(&[f64], usize, &mut [f64]) + Send + Sync>;

#[derive(Clone)]
enum Source {
    Constant(Vec<f64>),
    Samples(Arc<Vec<f64>>),
    Functional(PrefixFn),
}

/// Initial state `ξ` at the start node `t` of the solve.
///
/// A functional initial condition reads the driver increments on `[t0, t]`, so
/// `ξ^φ` is the same functional of the coupled driver. Constants and samples
/// do not depend on the driver and are left unchanged by a coupling.
#[derive(Clone)]
pub struct InitialCondition {
    start_node: usize,
    dim: usize,
    source: Source,
}

impl std::fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.source {
            Source::Constant(x) => format!("constant {x:?}"),
            Source::Samples(v) => format!("{} samples", v.len() / self.dim.max(1)),
            Source::Functional(_) => "functional".to_string(),
        };
        write!(f, "InitialCondition({kind}, start node {})", self.start_node)
    }
}

impl InitialCondition {
    pub fn constant(x: Vec<f64>) -> Self {
        Self { start_node: 0, dim: x.len(), source: Source::Constant(x) }
    }

    pub fn scalar(x: f64) -> Self {
        Self::constant(vec![x])
    }

    /// One state per path, row-major `[n_paths × dim]`.
    pub fn samples(dim: usize, values: Vec<f64>) -> Self {
        Self { start_node: 0, dim, source: Source::Samples(Arc::new(values)) }
    }

    /// `f(prefix, N, out)` with `prefix` the `start_node × N` driver increments before the start node.
    pub fn functional(
        start_node: usize,
        dim: usize,
        f: impl Fn(&[f64], usize, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self { start_node, dim, source: Source::Functional(Arc::new(f)) }
    }

    pub fn starting_at(mut self, node: usize) -> Self {
        self.start_node = node;
        self
    }

    pub fn start_node(&self) -> usize {
        self.start_node
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check(&self, d: usize, n_paths: usize, n_steps: usize) -> Result<()> {
        if self.dim != d {
            return Err(Error::Mismatch(format!("initial condition has dim {}, model state dim {d}", self.dim)));
        }
        if self.start_node >= n_steps {
            return Err(invalid(format!("start node {} leaves no steps on a grid of {n_steps}", self.start_node)));
        }
        if let Source::Samples(v) = &self.source {
            if v.len() != n_paths * d {
                return Err(Error::Mismatch(format!(
                    "{} initial samples for {n_paths} paths of dim {d}",
                    v.len()
                )));
            }
        }
        Ok(())
    }

    fn fill(&self, path: usize, drive: &[f64], n_noise: usize, out: &mut [f64]) {
        match &self.source {
            Source::Constant(x) => out.copy_from_slice(x),
            Source::Samples(v) => out.copy_from_slice(&v[path * self.dim..(path + 1) * self.dim]),
            Source::Functional(f) => f(&drive[..self.start_node * n_noise], n_noise, out),
        }
    }
}

/// Driver increments of an ensemble, row-major `[path][step][component]`.
#[derive(Debug, Clone, Copy)]
pub struct Driver<'a> {
    pub grid: &'a TimeGrid,
    pub dim: usize,
    pub increments: &'a [f64],
}

impl Driver<'_> {
    pub fn n_paths(&self) -> usize {
        self.increments.len() / (self.grid.n_steps() * self.dim)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub seed: Option<u64>,
    pub phi: Option<CouplingFunction>,
}

/// Solved paths on the nodes `t = s_start, …, s_n = T`, row-major `[path][node][component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub d: usize,
    pub states: Vec<f64>,
    pub provenance: Provenance,
}

impl PathEnsemble {
    pub fn row_len(&self) -> usize {
        self.grid.n_nodes() * self.d
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let l = self.row_len();
        &self.states[i * l..(i + 1) * l]
    }

    /// Component `j` at node `k` across paths.
    pub fn node_values(&self, k: usize, j: usize) -> Vec<f64> {
        (0..self.n_paths).map(|i| self.path(i)[k * self.d + j]).collect()
    }

    pub fn terminal(&self, j: usize) -> Vec<f64> {
        self.node_values(self.grid.n_steps(), j)
    }

    /// Apply `f` to every state entry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> PathEnsemble {
        PathEnsemble { states: self.states.iter().map(|v| f(*v)).collect(), ..self.clone() }
    }
}

struct Workspace {
    b: Vec<f64>,
    sig: Vec<f64>,
    level: Vec<f64>,
}

impl Workspace {
    fn new(d: usize, n: usize) -> Self {
        Self { b: vec![0.0; d], sig: vec![0.0; d * n], level: vec![0.0; n] }
    }
}

/// Running path statistics and potentials for node `k`.
fn aux_at<M: SdeModel + ?Sized>(model: &M, s: f64, level: &[f64], running_max: f64, integral: f64) -> Aux {
    let mut aux = Aux { running_max, running_integral: integral, potential: [0.0; 2] };
    for (slot, p) in aux.potential.iter_mut().zip(model.potentials()) {
        *slot = p.eval(s, level[p.component]);
    }
    aux
}

/// Integrate from node `resume` to the end. `states` covers all grid nodes;
/// nodes `start..=resume` must already hold the path. Returns the failing step on overflow.
fn integrate<M: SdeModel + ?Sized>(
    model: &M,
    grid: &TimeGrid,
    start: usize,
    resume: usize,
    states: &mut [f64],
    drive: &[f64],
    ws: &mut Workspace,
) -> std::result::Result<(), usize> {
    let d = model.dim_state();
    let n = model.dim_noise();
    let h = grid.step();
    ws.level.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..resume {
        for j in 0..n {
            ws.level[j] += drive[k * n + j];
        }
    }
    let mut running_max = f64::NEG_INFINITY;
    let mut integral = 0.0;
    for k in start..resume {
        running_max = running_max.max(states[k * d]);
        integral += states[k * d] * h;
    }
    for k in resume..grid.n_steps() {
        let (done, rest) = states.split_at_mut((k + 1) * d);
        let x = &done[k * d..];
        let s = grid.node(k);
        running_max = running_max.max(x[0]);
        let aux = aux_at(model, s, &ws.level, running_max, integral);
        model.drift(s, x, &aux, &mut ws.b);
        model.diffusion(s, x, &aux, &mut ws.sig);
        let dw = &drive[k * n..(k + 1) * n];
        for i in 0..d {
            let mut v = x[i] + ws.b[i] * h;
            for j in 0..n {
                v += ws.sig[i * n + j] * dw[j];
            }
            if !v.is_finite() {
                return Err(k);
            }
            rest[i] = v;
        }
        integral += x[0] * h;
        for j in 0..n {
            ws.level[j] += dw[j];
        }
    }
    Ok(())
}

fn check_model<M: SdeModel + ?Sized>(model: &M, init: &InitialCondition, grid: &TimeGrid, n: usize, n_paths: usize) -> Result<()> {
    if model.dim_noise() != n {
        return Err(Error::Mismatch(format!("model noise dim {} != driver dim {n}", model.dim_noise())));
    }
    if model.potentials().iter().any(|p| p.component >= n) || model.potentials().len() > 2 {
        return Err(invalid("model potentials must read existing driver components (at most two potentials)"));
    }
    init.check(model.dim_state(), n_paths, grid.n_steps())
}

/// Solve one ensemble against given driver increments.
pub fn euler_solve<M: SdeModel + ?Sized>(model: &M, init: &InitialCondition, driver: Driver<'_>) -> Result<PathEnsemble> {
    let grid = driver.grid;
    let (d, n) = (model.dim_state(), driver.dim);
    let row = grid.n_steps() * n;
    if row == 0 || driver.increments.len() % row != 0 {
        return Err(Error::Mismatch("driver increments do not match the grid".into()));
    }
    let n_paths = driver.n_paths();
    check_model(model, init, grid, n, n_paths)?;
    let start = init.start_node();
    let out_grid = grid.tail(start)?;
    let out_row = out_grid.n_nodes() * d;
    let mut states = vec![0.0; n_paths * out_row];
    par::try_fill_rows(
        &mut states,
        out_row,
        || (Workspace::new(d, n), vec![0.0; grid.n_nodes() * d]),
        |(ws, full), i, out| {
            let drive = &driver.increments[i * row..(i + 1) * row];
            init.fill(i, drive, n, &mut full[start * d..(start + 1) * d]);
            integrate(model, grid, start, start, full, drive, ws).map_err(|step| Error::NonFinite { path: i, step })?;
            out.copy_from_slice(&full[start * d..]);
            Ok(())
        },
    )?;
    Ok(PathEnsemble {
        grid: out_grid,
        n_paths,
        d,
        states,
        provenance: Provenance { model: model.meta().name.clone(), seed: None, phi: None },
    })
}

/// `X` driven by `W` and `X^φ` driven by `W^φ`, with `ξ^φ` as described on [`InitialCondition`].
pub fn coupled_solve<M: SdeModel + ?Sized>(
    model: &M,
    init: &InitialCondition,
    bundle: &BrownianBundle,
    phi: &CouplingFunction,
) -> Result<(PathEnsemble, PathEnsemble)> {
    let inc = bundle.increments()?;
    let coupled = inc.couple(phi)?;
    let grid = bundle.grid();
    let mut x = euler_solve(model, init, Driver { grid, dim: bundle.dim(), increments: &inc.w })?;
    let mut xp = euler_solve(model, init, Driver { grid, dim: bundle.dim(), increments: &coupled })?;
    x.provenance.seed = Some(bundle.seed());
    xp.provenance.seed = Some(bundle.seed());
    xp.provenance.phi = Some(phi.clone());
    Ok((x, xp))
}

/// A coupling to compare against the uncoupled solution, with an optional
/// window `[a, c]` for the local supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub phi: CouplingFunction,
    pub window: Option<(f64, f64)>,
}

impl Scenario {
    pub fn new(phi: CouplingFunction) -> Self {
        Self { phi, window: None }
    }

    /// `φ = 𝟙_(a,c]` with the local supremum taken over `[a, c]`.
    pub fn cut_off(a: f64, c: f64) -> Result<Self> {
        Ok(Self { phi: CouplingFunction::indicator(a, c)?, window: Some((a, c)) })
    }
}

/// Per-path outputs of one scenario, indexed by path.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSamples {
    /// `max_k |X_k − X^φ_k|` over nodes in `[t, T]`.
    pub sup: Vec<f64>,
    /// Same over the nodes of the window (all nodes without a window).
    pub sup_window: Vec<f64>,
    /// `|X_T − X^φ_T|`.
    pub terminal: Vec<f64>,
    /// `X^φ_T`, component 0.
    pub coupled_terminal: Vec<f64>,
    /// `Δ = sup_{s∈[t,c]} |X_s − X^φ_s|` with `c` the right end of the support of `φ`.
    pub delta: Vec<f64>,
    /// `Λ = ∫_c^T |b(s, X^φ; W) − b(s, X^φ; W^φ)| ds`, zero unless the drift reads potentials.
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// `X_T`, component 0.
    pub terminal: Vec<f64>,
    /// `sup_k |X_k|` over nodes in `[t, T]`.
    pub sup_abs: Vec<f64>,
    pub scenarios: Vec<ScenarioSamples>,
}

struct Prepared {
    weights: CouplingWeights,
    support: Option<(usize, usize)>,
    window: Option<(usize, usize)>,
}

#[derive(Default, Clone, Copy)]
struct Outcome {
    sup: f64,
    sup_window: f64,
    terminal: f64,
    coupled_terminal: f64,
    delta: f64,
    lambda: f64,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    if x.len() == 1 {
        (x[0] - y[0]).abs()
    } else {
        x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Stream all paths of `bundle`, solving `X` and `X^φ` for each scenario.
pub fn coupled_sweep<M: SdeModel + ?Sized>(
    model: &M,
    init: &InitialCondition,
    bundle: &BrownianBundle,
    scenarios: &[Scenario],
) -> Result<SweepResult> {
    let grid = bundle.grid();
    let (d, n) = (model.dim_state(), bundle.dim());
    check_model(model, init, grid, n, bundle.n_paths())?;
    let start = init.start_node();
    let prepared: Vec<Prepared> = scenarios
        .iter()
        .map(|sc| {
            let window = match sc.window {
                None => None,
                Some((a, c)) => match (grid.node_index(a), grid.node_index(c)) {
                    (Some(i), Some(j)) if i <= j => Some((i.max(start), j.max(start))),
                    _ => return Err(Error::Misaligned(format!("window [{a}, {c}] is not a pair of grid nodes"))),
                },
            };
            Ok(Prepared { weights: sc.phi.weights(grid)?, support: sc.phi.support_steps(grid)?, window })
        })
        .collect::<Result<_>>()?;
    // Steps on which W' is needed at all.
    let wp_range = prepared
        .iter()
        .filter_map(|p| p.support)
        .fold(None, |acc: Option<(usize, usize)>, (lo, hi)| Some(acc.map_or((lo, hi), |(a, b)| (a.min(lo), b.max(hi)))));
    let source = bundle.generator();
    let row = bundle.row_len();
    let nodes = grid.n_nodes();
    let randomized = !model.potentials().is_empty();

    let per_path = par::map_paths(
        bundle.n_paths(),
        || {
            (
                Workspace::new(d, n),
                vec![0.0; row],
                vec![0.0; row],
                vec![0.0; row],
                vec![0.0; nodes * d],
                vec![0.0; nodes * d],
            )
        },
        |(ws, dw, dwp, drive, base, coupled), i| -> Result<(f64, f64, Vec<Outcome>)> {
            source.fill(i, BrownianCopy::W, 0, dw);
            if let Some((lo, hi)) = wp_range {
                source.fill(i, BrownianCopy::WPrime, lo, &mut dwp[lo * n..hi * n]);
            }
            init.fill(i, dw, n, &mut base[start * d..(start + 1) * d]);
            integrate(model, grid, start, start, base, dw, ws).map_err(|step| Error::NonFinite { path: i, step })?;
            let terminal = base[(nodes - 1) * d];
            let sup_abs = (start..nodes).map(|k| norm(&base[k * d..(k + 1) * d])).fold(0.0, f64::max);

            let mut outcomes = Vec::with_capacity(prepared.len());
            for p in &prepared {
                let Some((lo, hi)) = p.support else {
                    outcomes.push(Outcome { coupled_terminal: terminal, ..Outcome::default() });
                    continue;
                };
                drive.copy_from_slice(dw);
                let w = CouplingWeights {
                    phi: p.weights.phi[lo..hi].to_vec(),
                    keep: p.weights.keep[lo..hi].to_vec(),
                };
                w.couple_into(n, &dw[lo * n..hi * n], &dwp[lo * n..hi * n], &mut drive[lo * n..hi * n]);
                let resume = if lo >= start {
                    coupled[start * d..(lo + 1) * d].copy_from_slice(&base[start * d..(lo + 1) * d]);
                    lo
                } else {
                    init.fill(i, drive, n, &mut coupled[start * d..(start + 1) * d]);
                    start
                };
                integrate(model, grid, start, resume, coupled, drive, ws)
                    .map_err(|step| Error::NonFinite { path: i, step })?;

                let mut o = Outcome::default();
                let c_node = hi.max(start);
                for k in start..nodes {
                    let e = dist(&base[k * d..(k + 1) * d], &coupled[k * d..(k + 1) * d]);
                    o.sup = o.sup.max(e);
                    if k <= c_node {
                        o.delta = o.delta.max(e);
                    }
                    if p.window.is_none_or(|(a, c)| a <= k && k <= c) {
                        o.sup_window = o.sup_window.max(e);
                    }
                }
                o.terminal = dist(&base[(nodes - 1) * d..], &coupled[(nodes - 1) * d..]);
                o.coupled_terminal = coupled[(nodes - 1) * d];
                if randomized {
                    o.lambda = drift_discrepancy(model, grid, start, c_node, coupled, dw, drive, ws);
                }
                outcomes.push(o);
            }
            Ok((terminal, sup_abs, outcomes))
        },
    );

    let mut result = SweepResult {
        terminal: Vec::with_capacity(bundle.n_paths()),
        sup_abs: Vec::with_capacity(bundle.n_paths()),
        scenarios: vec![ScenarioSamples::default(); scenarios.len()],
    };
    for r in per_path {
        let (terminal, sup_abs, outcomes) = r?;
        result.terminal.push(terminal);
        result.sup_abs.push(sup_abs);
        for (s, o) in result.scenarios.iter_mut().zip(outcomes) {
            s.sup.push(o.sup);
            s.sup_window.push(o.sup_window);
            s.terminal.push(o.terminal);
            s.coupled_terminal.push(o.coupled_terminal);
            s.delta.push(o.delta);
            s.lambda.push(o.lambda);
        }
    }
    Ok(result)
}

/// `Σ_{k ≥ c} |b(s_k, X^φ_k; aux from W) − b(s_k, X^φ_k; aux from W^φ)| h`.
#[allow(clippy::too_many_arguments)]
fn drift_discrepancy<M: SdeModel + ?Sized>(
    model: &M,
    grid: &TimeGrid,
    start: usize,
    from: usize,
    path: &[f64],
    dw: &[f64],
    dphi: &[f64],
    ws: &mut Workspace,
) -> f64 {
    let (d, n) = (model.dim_state(), model.dim_noise());
    let h = grid.step();
    let mut level_w = vec![0.0; n];
    let mut level_phi = vec![0.0; n];
    let mut b_w = vec![0.0; d];
    let mut running_max = f64::NEG_INFINITY;
    let mut integral = 0.0;
    let mut total = 0.0;
    for k in 0..grid.n_steps() {
        if k >= start {
            let x = &path[k * d..(k + 1) * d];
            running_max = running_max.max(x[0]);
            if k >= from {
                let s = grid.node(k);
                model.drift(s, x, &aux_at(model, s, &level_w, running_max, integral), &mut b_w);
                model.drift(s, x, &aux_at(model, s, &level_phi, running_max, integral), &mut ws.b);
                total += dist(&b_w, &ws.b) * h;
            }
            integral += x[0] * h;
        }
        for j in 0..n {
            level_w[j] += dw[k * n + j];
            level_phi[j] += dphi[k * n + j];
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::model::FnModel;
    use crate::sde::presets::Preset;
    use crate::wiener::{make_grid, sample_bundle};

    #[test]
    fn zero_coefficients_keep_the_initial_value() {
        let grid = make_grid(0.0, 1.0, 8).unwrap();
        let inc = sample_bundle(&grid, 1, 3, 1).unwrap().increments().unwrap();
        let x = euler_solve(&FnModel::constant(0.0, 0.0), &InitialCondition::scalar(5.0), Driver {
            grid: &grid,
            dim: 1,
            increments: &inc.w,
        })
        .unwrap();
        assert!(x.states.iter().all(|v| *v == 5.0));
    }

    #[test]
    fn unit_diffusion_reproduces_brownian_levels() {
        let grid = make_grid(0.0, 1.0, 16).unwrap();
        let inc = sample_bundle(&grid, 1, 4, 9).unwrap().increments().unwrap();
        let x = euler_solve(&FnModel::constant(0.0, 1.0), &InitialCondition::scalar(0.0), Driver {
            grid: &grid,
            dim: 1,
            increments: &inc.w,
        })
        .unwrap();
        for i in 0..4 {
            let levels = crate::wiener::Increments::levels(inc.w_path(i), 1, 0);
            for (a, b) in x.path(i).iter().zip(&levels) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sweep_matches_materialized_solve() {
        let grid = make_grid(0.0, 1.0, 32).unwrap();
        let bundle = sample_bundle(&grid, 1, 20, 4).unwrap();
        let model = Preset::from_pairs("linear", &[]).unwrap();
        let init = InitialCondition::scalar(1.0);
        let sc = Scenario::cut_off(0.25, 0.5).unwrap();
        let (x, xp) = coupled_solve(&model, &init, &bundle, &sc.phi).unwrap();
        let sweep = coupled_sweep(&model, &init, &bundle, &[sc]).unwrap();
        for i in 0..20 {
            let sup = x.path(i).iter().zip(xp.path(i)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert_eq!(sup, sweep.scenarios[0].sup[i]);
            assert_eq!(x.path(i)[32], sweep.terminal[i]);
            assert_eq!(xp.path(i)[32], sweep.scenarios[0].coupled_terminal[i]);
            let local = x.path(i)[8..=16]
                .iter()
                .zip(&xp.path(i)[8..=16])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert_eq!(local, sweep.scenarios[0].sup_window[i]);
        }
    }

    #[test]
    fn blow_up_reports_path_and_step() {
        let grid = make_grid(0.0, 1.0, 64).unwrap();
        let inc = sample_bundle(&grid, 1, 2, 1).unwrap().increments().unwrap();
        let m = FnModel::new(1, 1, |_, x, _, o| o[0] = x[0] * x[0] * 1e200, |_, _, _, o| o[0] = 0.0, Preset::from_pairs("linear", &[]).unwrap().meta().clone());
        let err = euler_solve(&m, &InitialCondition::scalar(1.0), Driver { grid: &grid, dim: 1, increments: &inc.w }).unwrap_err();
        assert!(matches!(err, Error::NonFinite { path: 0, step: 1 }), "{err:?}");
    }
}
