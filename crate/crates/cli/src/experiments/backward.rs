use wiener_coupling::bsde::{bsde_coupling_distance, bsde_variation, lsmc_solve, BsdeModel, BsdeSolution, DEFAULT_DEGREE};
use wiener_coupling::estimators::{lp_sup_distance, LpEstimate};
use wiener_coupling::par;
use wiener_coupling::record::EstimateRecord;
use wiener_coupling::sde::{coupled_solve, euler_solve, Driver, FnModel, InitialCondition, PathEnsemble, Preset, SdeModel};
use wiener_coupling::stats::batch_mean;
use wiener_coupling::wiener::{sample_bundle, BrownianBundle, BrownianCopy, CouplingFunction, TimeGrid};

use super::{ci_half, fit_points, Ctx};
use crate::outcome::{Claim, Outcome};
use crate::CliError;

/// Increments of `W` only, row-major `[path][step]`.
fn w_increments(bundle: &BrownianBundle) -> Vec<f64> {
    let row = bundle.row_len();
    let mut out = vec![0.0; row * bundle.n_paths()];
    par::fill_rows(&mut out, row, || (), |_, i, r| bundle.fill_path(i, BrownianCopy::W, r));
    out
}

fn forward(model: &dyn SdeModel, x0: f64, grid: &TimeGrid, inc: &[f64]) -> Result<PathEnsemble, CliError> {
    Ok(euler_solve(model, &InitialCondition::scalar(x0), Driver { grid, dim: 1, increments: inc })?)
}

/// Nodes at `0, T/4, T/2, 3T/4`.
fn quarter_nodes(grid: &TimeGrid) -> Vec<usize> {
    let n = grid.n_steps();
    let mut k: Vec<usize> = (0..4).map(|j| j * n / 4).collect();
    k.dedup();
    k
}

pub fn bsde_closed_form(ctx: &Ctx) -> Result<Outcome, CliError> {
    let grid = ctx.grid(1.0, 64)?;
    let n_paths = ctx.n_paths(50_000)?;
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let inc = w_increments(&bundle);
    let x = forward(&FnModel::constant(0.0, 1.0), 0.0, &grid, &inc)?;
    let t_end = grid.t_end();
    let mut out = Outcome::default();

    // g(x) = x, f = 0 on X = W: Y = W and Z ≡ 1.
    let sol = lsmc_solve(&BsdeModel::identity(), &x, &inc, DEFAULT_DEGREE)?;
    let mut worst_z: f64 = 0.0;
    for k in 0..grid.n_steps() {
        worst_z = worst_z.max((batch_mean(sol.z_at(k)).mean - 1.0).abs());
    }
    out.records.push(EstimateRecord::new("identity_max_z_error", worst_z, 0.0, n_paths, ctx.seed()));
    out.claims.push(Claim::at_most("bsde-closed-form", "g(x) = x on X = W: every step mean of Z within 5% of 1", 0.05, worst_z, 0.0));
    let mut worst_y: f64 = 0.0;
    for k in quarter_nodes(&grid) {
        let w = x.node_values(k, 0);
        let sq: Vec<f64> = sol.y_at(k).iter().zip(&w).map(|(y, w)| (y - w).powi(2)).collect();
        let rms = batch_mean(&sq).mean.sqrt();
        out.records.push(EstimateRecord::new("identity_rms_y_error", rms, 0.0, n_paths, ctx.seed()).with("s", grid.node(k)));
        worst_y = worst_y.max(rms / t_end.sqrt());
    }
    out.claims.push(Claim::at_most("bsde-closed-form", "g(x) = x on X = W: ‖Y − W‖₂ / √T at quarter nodes", 0.05, worst_y, 0.0));

    // f(y) = −y, g(x) = x: Y_s = e^{−(T−s)} W_s, Z_s = e^{−(T−s)}.
    let sol = lsmc_solve(&BsdeModel::linear_discount(1.0), &x, &inc, DEFAULT_DEGREE)?;
    let mut worst_rel_y: f64 = 0.0;
    let mut worst_rel_z: f64 = 0.0;
    for k in quarter_nodes(&grid) {
        let s = grid.node(k);
        let factor = (-(t_end - s)).exp();
        let w = x.node_values(k, 0);
        let rel: Vec<f64> = sol.y_at(k).iter().zip(&w).filter(|(_, w)| w.abs() > 0.2).map(|(y, w)| y / (factor * w)).collect();
        if !rel.is_empty() {
            let m = batch_mean(&rel);
            out.records.push(EstimateRecord::new("linear_y_ratio", m.mean, m.std_error, rel.len(), ctx.seed()).with("s", s));
            worst_rel_y = worst_rel_y.max((m.mean - 1.0).abs());
        }
        // Z on the step (s_k, s_{k+1}] projects Y_{k+1}.
        let z = batch_mean(sol.z_at(k));
        let target = (-(t_end - grid.node(k + 1))).exp();
        out.records.push(EstimateRecord::new("linear_z", z.mean, z.std_error, n_paths, ctx.seed()).with("s", s));
        out.records.push(EstimateRecord::new("linear_z_exact", target, 0.0, n_paths, ctx.seed()).with("s", s));
        worst_rel_z = worst_rel_z.max((z.mean / target - 1.0).abs());
    }
    out.claims.push(Claim::at_most("bsde-closed-form", "f = −y: Y / (e^{−(T−s)} W_s) within 5% of 1 (|W_s| > 0.2)", 0.05, worst_rel_y, 0.0));
    out.claims.push(Claim::at_most("bsde-closed-form", "f = −y: mean Z within 5% of e^{−(T−s)}", 0.05, worst_rel_z, 0.0));
    Ok(out)
}

pub fn bsde_variation_cir(ctx: &Ctx) -> Result<Outcome, CliError> {
    let model = Preset::build("cir", &ctx.preset_params(&["xi"]))?;
    let x0 = ctx.param("xi", 1.0);
    let grid = ctx.grid(1.0, 1 << 10)?;
    let n_paths = ctx.n_paths(20_000)?;
    let intervals = ctx.intervals(0.25, 2, 7, true)?;
    let p_list = ctx.p_list(&[2.0])?;
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let inc = w_increments(&bundle);
    let x = forward(&model, x0, &grid, &inc)?;
    let sol = lsmc_solve(&BsdeModel::identity(), &x, &inc, DEFAULT_DEGREE)?;
    drop(inc);
    let mut out = Outcome::default();
    for p in p_list {
        let (mut ypts, mut zpts) = (Vec::new(), Vec::new());
        for &(a, c) in &intervals {
            let (y, z) = bsde_variation(&sol, a, c, p)?;
            out.records.push(EstimateRecord::from_lp("y_variation", &y, ctx.seed()).with("a", a).with("c", c));
            out.records.push(EstimateRecord::from_lp("z_energy", &z, ctx.seed()).with("a", a).with("c", c));
            ypts.push((c - a, y));
            zpts.push((c - a, z));
        }
        for (name, pts) in [("y_variation", &ypts), ("z_energy", &zpts)] {
            let fit = out.fit(format!("{name}_p{p}"), fit_points(pts)?).clone();
            out.claims.push(Claim::at_least(
                "bsde-variation-rate",
                format!("{name} exponent in c−a is at least 1/4 (CIR forward, p = {p})"),
                0.25,
                fit.slope,
                ci_half(&fit),
            ));
        }
    }
    Ok(out)
}

struct Coupled {
    forward: LpEstimate,
    y: LpEstimate,
    z: LpEstimate,
    terminal: f64,
}

fn coupled_distances(
    model: &dyn SdeModel,
    bsde: &BsdeModel,
    sol: &BsdeSolution,
    x: &PathEnsemble,
    x0: f64,
    bundle: &BrownianBundle,
    (a, c): (f64, f64),
    p: f64,
) -> Result<Coupled, CliError> {
    let (_, xp) = coupled_solve(model, &InitialCondition::scalar(x0), bundle, &CouplingFunction::indicator(a, c)?)?;
    let sol_phi = sol.evaluate_on(bsde, &xp)?;
    let (y, z) = bsde_coupling_distance(sol, &sol_phi, p)?;
    let forward = lp_sup_distance(x, &xp, p)?;
    let last = x.grid.n_steps();
    let d: Vec<f64> = sol.y_at(last).iter().zip(sol_phi.y_at(last)).map(|(u, v)| (u - v).abs()).collect();
    let terminal = LpEstimate::from_samples(&d, 2.0)?.value;
    Ok(Coupled { forward, y, z, terminal })
}

pub fn bsde_coupling(ctx: &Ctx) -> Result<Outcome, CliError> {
    let model = Preset::build("linear", &ctx.preset_params(&["xi"]))?;
    let x0 = ctx.param("xi", 1.0);
    let grid = ctx.grid(1.0, 1 << 8)?;
    let n_paths = ctx.n_paths(20_000)?;
    let intervals = ctx.intervals(0.25, 2, 6, true)?;
    let p_list = ctx.p_list(&[2.0])?;
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let inc = w_increments(&bundle);
    let bsde = BsdeModel::identity();
    let alpha = bsde.alpha;
    let mut out = Outcome::default();

    // Brownian reduction: X = W, g(x) = x, so Y_T − Y^φ_T = W_T − W^φ_T.
    let brownian = FnModel::constant(0.0, 1.0);
    let xw = forward(&brownian, 0.0, &grid, &inc)?;
    let sol_w = lsmc_solve(&bsde, &xw, &inc, DEFAULT_DEGREE)?;
    for &iv in &intervals {
        let d = coupled_distances(&brownian, &bsde, &sol_w, &xw, 0.0, &bundle, iv, 2.0)?;
        let exact = (2.0 * (iv.1 - iv.0)).sqrt();
        out.records.push(EstimateRecord::new("brownian_terminal_y_distance", d.terminal, 0.0, n_paths, ctx.seed()).with("a", iv.0).with("c", iv.1));
        // ‖W_T − W^φ_T‖₂² is a mean of χ²₁·2(c−a) samples, relative se √(2/n) on the square.
        let tol = 3.0 * exact * (0.5 / n_paths as f64).sqrt();
        out.claims.push(Claim::within(
            "bsde-coupling-brownian",
            format!("‖Y_T − Y^(a,c]_T‖₂ = √(2(c−a)) for X = W on ({}, {}]", iv.0, iv.1),
            exact,
            d.terminal,
            tol,
        ));
    }
    drop((xw, sol_w));

    let x = forward(&model, x0, &grid, &inc)?;
    let sol = lsmc_solve(&bsde, &x, &inc, DEFAULT_DEGREE)?;
    drop(inc);
    for p in p_list {
        let (mut xs, mut ys, mut zs) = (Vec::new(), Vec::new(), Vec::new());
        for &iv in &intervals {
            let d = coupled_distances(&model, &bsde, &sol, &x, x0, &bundle, iv, p)?;
            let rec = |name: &str, e: &LpEstimate| EstimateRecord::from_lp(name, e, ctx.seed()).with("a", iv.0).with("c", iv.1);
            out.records.push(rec("forward_sup_distance", &d.forward));
            out.records.push(rec("y_sup_distance", &d.y));
            out.records.push(rec("z_l2_distance", &d.z));
            let len = iv.1 - iv.0;
            xs.push((len, d.forward));
            ys.push((len, d.y));
            zs.push((len, d.z));
        }
        let fx = out.fit(format!("forward_p{p}"), fit_points(&xs)?).clone();
        let fy = out.fit(format!("y_p{p}"), fit_points(&ys)?).clone();
        out.fit(format!("z_p{p}"), fit_points(&zs)?);
        out.claims.push(Claim::within(
            "bsde-coupling-rate",
            format!("Y coupling exponent equals α times the forward exponent (α = {alpha}, p = {p})"),
            alpha * fx.slope,
            fy.slope,
            ci_half(&fx) + ci_half(&fy),
        ));
    }
    Ok(out)
}
