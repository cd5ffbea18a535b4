use std::collections::BTreeMap;

use wiener_coupling::estimators::{besov_phi_alpha as besov, default_intervals, BesovSpec, LpEstimate};
use wiener_coupling::par;
use wiener_coupling::record::EstimateRecord;
use wiener_coupling::sde::{coupled_sweep, potential_indicator, FnModel, InitialCondition, Preset, Scenario, SdeModel, SweepResult};
use wiener_coupling::wiener::{sample_bundle, BrownianBundle, BrownianCopy, Increments, TimeGrid};
use wiener_coupling::Error;

use super::{fit_points, Ctx};
use crate::outcome::{Claim, Outcome};
use crate::CliError;

fn cut_offs(intervals: &[(f64, f64)]) -> Result<Vec<Scenario>, CliError> {
    Ok(intervals.iter().map(|(a, c)| Scenario::cut_off(*a, *c)).collect::<Result<_, _>>()?)
}

fn sweep(model: &dyn SdeModel, x0: f64, bundle: &BrownianBundle, intervals: &[(f64, f64)]) -> Result<SweepResult, CliError> {
    Ok(coupled_sweep(model, &InitialCondition::scalar(x0), bundle, &cut_offs(intervals)?)?)
}

fn lp(values: &[f64], p: f64) -> Result<LpEstimate, CliError> {
    Ok(LpEstimate::from_samples(values, p)?)
}

fn interval_record(name: &str, e: &LpEstimate, seed: u64, (a, c): (f64, f64)) -> EstimateRecord {
    EstimateRecord::from_lp(name, e, seed).with("a", a).with("c", c)
}

pub fn lipschitz_rate(ctx: &Ctx) -> Result<Outcome, CliError> {
    let name = ctx.config.preset.clone().unwrap_or_else(|| "linear".into());
    let model = Preset::build(&name, &ctx.preset_params(&["xi"]))?;
    if model.meta().l_sigma.is_none() || model.meta().l_b.is_none() {
        return Err(CliError::Config(format!("lipschitz-rate needs a Lipschitz preset, '{name}' is not")));
    }
    let x0 = ctx.param("xi", 1.0);
    let grid = ctx.grid(1.0, 1 << 12)?;
    let n_paths = ctx.n_paths(100_000)?;
    let intervals = ctx.intervals(0.0, 3, 8, true)?;
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let res = sweep(&model, x0, &bundle, &intervals)?;
    let mut out = Outcome::default();
    for p in ctx.p_list(&[2.0])? {
        let mut pts = Vec::new();
        for (iv, sc) in intervals.iter().zip(&res.scenarios) {
            let e = lp(&sc.sup, p)?;
            out.records.push(interval_record("sup_distance", &e, ctx.seed(), *iv));
            pts.push((iv.1 - iv.0, e));
        }
        let fit = out.fit(format!("sup_distance_p{p}"), fit_points(&pts)?).clone();
        out.claims.push(Claim::within(
            "lipschitz-cutoff-rate",
            format!("exponent of ‖sup|X−X^(a,c]|‖_{p} in c−a for preset {name}"),
            0.5,
            fit.slope,
            0.05,
        ));
    }
    Ok(out)
}

/// `c_p = [(1/4) E|W_1| ((3−2θ)(2−2θ)/2)^{(p−1)/(2−2θ)}]^{1/p}` with `E|W_1| = √(2/π)`.
pub fn sharpness_constant(theta: f64, p: f64) -> f64 {
    let e_abs = (2.0 / std::f64::consts::PI).sqrt();
    (0.25 * e_abs * ((3.0 - 2.0 * theta) * (2.0 - 2.0 * theta) / 2.0).powf((p - 1.0) / (2.0 - 2.0 * theta))).powf(1.0 / p)
}

struct HolderRun {
    theta: f64,
    intervals: Vec<(f64, f64)>,
    /// Per `p`: terminal distances per interval.
    by_p: Vec<(f64, Vec<LpEstimate>)>,
}

fn holder_run(ctx: &Ctx) -> Result<HolderRun, CliError> {
    ctx.only_params(&["theta"])?;
    let theta = ctx.param("theta", 0.5);
    if !(0.5..1.0).contains(&theta) {
        return Err(CliError::Config(format!("theta must lie in [1/2, 1), got {theta}")));
    }
    let grid = ctx.grid(2.0, 1 << 14)?;
    let n_paths = ctx.n_paths(100_000)?;
    let intervals = ctx.intervals(0.0, 2, 7, true)?;
    let p_list = ctx.p_list(&[4.0])?;
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let mut terminal = Vec::new();
    for &(a, c) in &intervals {
        // The diffusion switches from 1 to |x|^θ at the right end of the window.
        let model = Preset::from_pairs("holder_power", &[("theta", theta), ("switch", c)])?;
        let res = sweep(&model, 0.0, &bundle, &[(a, c)])?;
        terminal.push(res.scenarios.into_iter().next().expect("one scenario").terminal);
    }
    let by_p = p_list
        .iter()
        .map(|&p| Ok((p, terminal.iter().map(|t| lp(t, p)).collect::<Result<Vec<_>, CliError>>()?)))
        .collect::<Result<_, CliError>>()?;
    Ok(HolderRun { theta, intervals, by_p })
}

fn lower_bound_claims(ctx: &Ctx, run: &HolderRun, out: &mut Outcome) {
    for (p, est) in &run.by_p {
        let p = *p;
        if p < 3.0 - 2.0 * run.theta {
            continue;
        }
        let cp = sharpness_constant(run.theta, p);
        for (iv, e) in run.intervals.iter().zip(est) {
            let bound = cp * (iv.1 - iv.0).powf(1.0 / (2.0 * p));
            out.records.push(interval_record("sharpness_lower_bound", &LpEstimate { value: bound, std_error: 0.0, ..*e }, ctx.seed(), *iv));
            out.claims.push(Claim::at_least(
                "holder-sharpness-lower-bound",
                format!("‖X_T−X_T^(a,c]‖_{p} ≥ c_p (c−a)^(1/(2p)) − 3σ on ({}, {}]", iv.0, iv.1),
                bound,
                e.value,
                3.0 * e.std_error,
            ));
        }
    }
}

fn holder_records(ctx: &Ctx, run: &HolderRun, out: &mut Outcome) {
    for (_, est) in &run.by_p {
        for (iv, e) in run.intervals.iter().zip(est) {
            out.records.push(interval_record("terminal_distance", e, ctx.seed(), *iv));
        }
    }
}

pub fn holder_rate(ctx: &Ctx) -> Result<Outcome, CliError> {
    let run = holder_run(ctx)?;
    let mut out = Outcome::default();
    holder_records(ctx, &run, &mut out);
    for (p, est) in &run.by_p {
        let pts: Vec<(f64, LpEstimate)> = run.intervals.iter().zip(est).map(|(iv, e)| (iv.1 - iv.0, *e)).collect();
        let fit = out.fit(format!("terminal_distance_p{p}"), fit_points(&pts)?).clone();
        out.claims.push(Claim::within(
            "holder-cutoff-rate",
            format!("exponent of ‖X_T−X_T^(a,c]‖_{p} in c−a equals 1/(2p), θ = {}", run.theta),
            1.0 / (2.0 * p),
            fit.slope,
            0.05,
        ));
    }
    lower_bound_claims(ctx, &run, &mut out);
    Ok(out)
}

pub fn holder_lower_bound(ctx: &Ctx) -> Result<Outcome, CliError> {
    let run = holder_run(ctx)?;
    let mut out = Outcome::default();
    holder_records(ctx, &run, &mut out);
    lower_bound_claims(ctx, &run, &mut out);
    if out.claims.is_empty() {
        return Err(CliError::Config(format!("the lower bound needs p >= 3 − 2θ = {}", 3.0 - 2.0 * run.theta)));
    }
    Ok(out)
}

pub fn small_interval(ctx: &Ctx) -> Result<Outcome, CliError> {
    let x0 = ctx.param("xi", 1.0);
    let presets: Vec<(String, BTreeMap<String, f64>)> = match &ctx.config.preset {
        Some(name) => vec![(name.clone(), ctx.preset_params(&["xi"]))],
        None => {
            if !ctx.preset_params(&["xi"]).is_empty() {
                return Err(CliError::Config("preset parameters need an explicit preset".into()));
            }
            vec![
                ("linear".into(), BTreeMap::new()),
                ("cir".into(), BTreeMap::new()),
                ("holder_power".into(), [("theta".to_string(), 0.6), ("kappa".to_string(), 0.5)].into_iter().collect()),
            ]
        }
    };
    let grid = ctx.grid(1.0, 1 << 12)?;
    let n_paths = ctx.n_paths(20_000)?;
    let intervals = ctx.intervals(0.25, 3, 8, true)?;
    let p_list = ctx.p_list(&[1.0, 2.0, 4.0])?;
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let mut out = Outcome::default();
    for (name, params) in &presets {
        let model = Preset::build(name, params)?;
        let res = sweep(&model, x0, &bundle, &intervals)?;
        for &p in &p_list {
            let norm_xi = x0.abs();
            let mut ratios = Vec::new();
            for (iv, sc) in intervals.iter().zip(&res.scenarios) {
                let e = lp(&sc.sup_window, p)?;
                let scale = 1.0 / ((iv.1 - iv.0).sqrt() * (1.0 + norm_xi));
                let r = e.scaled(scale);
                out.records.push(interval_record(&format!("{name}_local_sup_ratio"), &r, ctx.seed(), *iv));
                ratios.push(r.value);
            }
            let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            out.records.push(EstimateRecord::new(format!("{name}_ratio_band"), hi / lo, 0.0, n_paths, ctx.seed()).with("p", p));
            out.claims.push(Claim::at_most(
                "small-interval-universal-bound",
                format!("{name}, p = {p}: max/min of the normalized local distance over dyadic c−a"),
                1.2,
                hi / lo,
                0.0,
            ));
        }
    }
    Ok(out)
}

pub fn counterexample_blowup(ctx: &Ctx) -> Result<Outcome, CliError> {
    ctx.only_params(&["theta", "levels"])?;
    let model = Preset::build("ciesielski", &ctx.config.params)?;
    let spec = model.counterexample().expect("ciesielski preset").clone();
    let grid = ctx.grid(1.0, 1 << 12)?;
    let n_paths = ctx.n_paths(20_000)?;
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    // Windows of half the level interval, at three offsets.
    let mut windows = Vec::new();
    for l in 1..=spec.levels() {
        let (lo, hi) = spec.interval(l);
        let len = (hi - lo) / 2.0;
        for j in 0..3 {
            let a = lo + j as f64 * len / 2.0;
            windows.push((l, (a, a + len)));
        }
    }
    let ivs: Vec<(f64, f64)> = windows.iter().map(|w| w.1).collect();
    let res = sweep(&model, 0.0, &bundle, &ivs)?;
    let mut out = Outcome::default();
    let mut best: Vec<Option<LpEstimate>> = vec![None; spec.levels()];
    for ((l, iv), sc) in windows.iter().zip(&res.scenarios) {
        let r = lp(&sc.terminal, 2.0)?.scaled(1.0 / (iv.1 - iv.0).sqrt());
        out.records.push(interval_record("normalized_terminal_distance", &r, ctx.seed(), *iv).with("level", *l as f64));
        let slot = &mut best[l - 1];
        if slot.is_none_or(|b| r.value > b.value) {
            *slot = Some(r);
        }
    }
    let best: Vec<LpEstimate> = best.into_iter().map(|b| b.expect("three windows per level")).collect();
    for (l, b) in best.iter().enumerate() {
        out.records.push(EstimateRecord::from_lp("level_ratio", b, ctx.seed()).with("level", (l + 1) as f64));
    }
    for l in 1..best.len() {
        let se = best[l].std_error.hypot(best[l - 1].std_error);
        let z = (best[l].value - best[l - 1].value) / se;
        out.claims.push(Claim::at_least(
            "counterexample-blowup",
            format!("level {} ratio exceeds level {} ratio by at least 2σ (measured in σ units)", l + 1, l),
            2.0,
            z,
            0.0,
        ));
    }
    Ok(out)
}

pub fn besov_phi_alpha(ctx: &Ctx) -> Result<Outcome, CliError> {
    let grid = ctx.grid(1.0, 1 << 10)?;
    let n_paths = ctx.n_paths(100_000)?;
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let intervals = default_intervals(grid.t0(), grid.t_end());
    let spec = BesovSpec::phi_alpha(2.0, intervals.clone())?;
    let mut out = Outcome::default();
    let brownian = FnModel::constant(0.0, 1.0);
    let linear = Preset::from_pairs("linear", &[])?;
    let cases: [(&str, &dyn SdeModel, f64); 2] = [("brownian", &brownian, 0.0), ("linear", &linear, 1.0)];
    for (name, model, x0) in cases {
        let res = sweep(model, x0, &bundle, &intervals)?;
        let est = besov(&spec, |a, c| {
            let i = intervals.iter().position(|iv| *iv == (a, c)).expect("interval from the spec");
            LpEstimate::from_samples(&res.scenarios[i].terminal, 2.0)
        })?;
        for r in &est.ratios {
            let e = LpEstimate { value: r.ratio, std_error: r.ratio_se, ..r.distance };
            out.records.push(interval_record(&format!("{name}_phi2_ratio"), &e, ctx.seed(), (r.a, r.c)));
        }
        out.records.push(
            EstimateRecord::from_lp(format!("{name}_phi2_seminorm"), &est.estimate, ctx.seed())
                .with("a", est.argmax.0)
                .with("c", est.argmax.1),
        );
        if name == "brownian" {
            out.claims.push(Claim::within(
                "besov-phi2-brownian",
                "Φ₂ seminorm of W_T equals √2 within 3σ",
                2f64.sqrt(),
                est.estimate.value,
                3.0 * est.estimate.std_error,
            ));
        }
    }
    Ok(out)
}

/// `∫_c^T |U^(a,c]_s − U_s| ds` per path (right-endpoint rule) for every window.
fn potential_gaps(bundle: &BrownianBundle, grid: &TimeGrid, level: f64, windows: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let source = bundle.generator();
    let n = grid.n_steps();
    let h = grid.step();
    let nodes = grid.nodes();
    let first = windows.iter().map(|w| w.0).min().unwrap_or(0);
    let kc = windows[0].1;
    par::map_paths(
        bundle.n_paths(),
        || (vec![0.0; n], vec![0.0; n]),
        |(dw, dwp), i| {
            source.fill(i, BrownianCopy::W, 0, dw);
            source.fill(i, BrownianCopy::WPrime, first, &mut dwp[first..kc]);
            let w = Increments::levels(dw, 1, 0);
            windows
                .iter()
                .map(|&(ka, kc)| {
                    let a = nodes[ka];
                    let shift: f64 = (ka..kc).map(|k| dwp[k] - dw[k]).sum();
                    let coupled: Vec<f64> = w.iter().enumerate().map(|(k, v)| if k >= kc { v + shift } else { *v }).collect();
                    let u = potential_indicator(level, a, &nodes, &w);
                    let up = potential_indicator(level, a, &nodes, &coupled);
                    (kc + 1..=n).map(|k| (u[k] - up[k]).abs() * h).sum()
                })
                .collect()
        },
    )
}

pub fn indicator_potential(ctx: &Ctx) -> Result<Outcome, CliError> {
    ctx.only_params(&["level"])?;
    let level = ctx.param("level", 0.0);
    let beta2 = 2.0;
    let grid = ctx.grid(1.0, 1 << 12)?;
    let n_paths = ctx.n_paths(20_000)?;
    let intervals = ctx.intervals(0.5, 2, 7, false)?;
    let c = intervals[0].1;
    if intervals.iter().any(|iv| iv.1 != c) {
        return Err(CliError::Config("indicator-potential needs intervals sharing their right end c".into()));
    }
    let idx = |t: f64| grid.node_index(t).ok_or_else(|| CliError::from(Error::Misaligned(format!("{t} is not a grid node"))));
    let windows: Vec<(usize, usize)> = intervals.iter().map(|(a, c)| Ok((idx(*a)?, idx(*c)?))).collect::<Result<_, CliError>>()?;
    let t_end = grid.t_end();
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let gaps = potential_gaps(&bundle, &grid, level, &windows);
    let mut out = Outcome::default();
    let mut pts = Vec::new();
    for (j, iv) in intervals.iter().enumerate() {
        let samples: Vec<f64> = gaps.iter().map(|g| g[j]).collect();
        let e = lp(&samples, 2.0)?;
        out.records.push(interval_record("potential_gap", &e, ctx.seed(), *iv));
        let bound = 8.0 * beta2 * beta2 * ((t_end - c) * (iv.1 - iv.0)).sqrt();
        out.claims.push(Claim::at_most(
            "indicator-potential-bound",
            format!("‖∫_c^T|U^(a,c]−U|ds‖₂ ≤ 8β₂²√((T−c)(c−a)) on ({}, {}], β₂ = 2", iv.0, iv.1),
            bound,
            e.value,
            3.0 * e.std_error,
        ));
        pts.push((iv.1 - iv.0, e));
    }
    let fit = out.fit("potential_gap", fit_points(&pts)?).clone();
    out.claims.push(Claim::within("indicator-potential-rate", "exponent of the potential gap in c−a", 0.5, fit.slope, 0.1));

    // Random-coefficient diagnostics Δ and Λ for the controlled-indicator preset.
    let model = Preset::from_pairs("controlled_indicator", &[("level_u", level), ("level_v", level)])?;
    let res = sweep(&model, 1.0, &bundle, &intervals)?;
    for (iv, sc) in intervals.iter().zip(&res.scenarios) {
        out.records.push(interval_record("controlled_indicator_delta", &lp(&sc.delta, 2.0)?, ctx.seed(), *iv));
        out.records.push(interval_record("controlled_indicator_lambda", &lp(&sc.lambda, 2.0)?, ctx.seed(), *iv));
        out.records.push(interval_record("controlled_indicator_sup_distance", &lp(&sc.sup, 2.0)?, ctx.seed(), *iv));
    }
    Ok(out)
}
