use wiener_coupling::estimators::{
    bmo_s2_norm, default_r_grid, equivalence_brackets, fefferman_check, gr_inequality_check,
    interpolation_functional_sampled, Conditioner, GrCase, GrParams, LpEstimate,
};
use wiener_coupling::record::EstimateRecord;
use wiener_coupling::wiener::{couple, make_grid, sample_bundle, CouplingFunction, Increments};

use super::Ctx;
use crate::outcome::{Claim, Outcome};
use crate::quadrature::interpolation_oracle;
use crate::CliError;

type Profile = (&'static str, fn(f64) -> f64, f64, f64);

const PROFILES: [Profile; 3] = [
    ("r", |r| r, 0.5, 1.0),
    ("r(1-r/2)", |r| r * (1.0 - 0.5 * r), 0.3, 2.0),
    ("sqrt(1-sqrt(1-r^2))", |r| (1.0 - (1.0 - r * r).sqrt()).sqrt(), 0.7, 1.5),
];

pub fn interpolation_functional(ctx: &Ctx) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    for (i, (name, f, eta, q)) in PROFILES.iter().enumerate() {
        let got = wiener_coupling::estimators::interpolation_functional(f, *eta, *q)?;
        let oracle = interpolation_oracle(f, *eta, *q);
        out.records.push(EstimateRecord::new("functional", got, 0.0, 0, ctx.seed()).with("profile", i as f64).with("eta", *eta).with("q", *q));
        out.records.push(EstimateRecord::new("functional_quadrature", oracle, 0.0, 0, ctx.seed()).with("profile", i as f64).with("eta", *eta).with("q", *q));
        out.claims.push(Claim::within(
            "interpolation-functional",
            format!("relative gap to adaptive quadrature for F = {name}, η = {eta}, q = {q}"),
            0.0,
            (got - oracle).abs() / oracle,
            1e-6,
        ));
    }

    let r_grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
    for eta in [0.25, 0.5, 0.75] {
        let rep = equivalence_brackets(eta, &r_grid)?;
        for (name, v) in [("k_min", rep.k_min), ("k_max", rep.k_max), ("mu_min", rep.mu_min), ("mu_max", rep.mu_max)] {
            out.records.push(EstimateRecord::new(format!("equivalence_{name}"), v, 0.0, 0, ctx.seed()).with("eta", eta));
        }
        out.claims.push(Claim::flag(
            "interpolation-equivalence",
            format!("K_η(r) r^η ∈ [1, 2^(η/2)] and μ density ratio ∈ [1/√2, 2] on a 1000-point grid, η = {eta}"),
            rep.ok,
        ));
    }

    // Sampled profile F(r) = ‖W_1 − W_1^r‖₂, exactly √(2(1−√(1−r²))).
    let n_paths = ctx.n_paths(10_000)?;
    let grid = make_grid(0.0, 1.0, 1)?;
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let w = bundle.increments()?.w;
    let r = default_r_grid(200);
    let mut f = Vec::with_capacity(r.len());
    let mut se = Vec::with_capacity(r.len());
    for &ri in &r {
        let wr = couple(&bundle, &CouplingFunction::constant(ri)?)?;
        let d: Vec<f64> = w.iter().zip(&wr).map(|(a, b)| (a - b).abs()).collect();
        let e = LpEstimate::from_samples(&d, 2.0)?;
        f.push(e.value);
        se.push(e.std_error);
    }
    let exact_profile = |r: f64| (2.0 * r * r / (1.0 + (1.0 - r * r).sqrt())).sqrt();
    for (eta, q) in [(0.5, 2.0), (0.25, 1.0)] {
        let (v, v_se) = interpolation_functional_sampled(&r, &f, &se, eta, q)?;
        let exact = wiener_coupling::estimators::interpolation_functional(exact_profile, eta, q)?;
        out.records.push(EstimateRecord::new("sampled_functional_w1", v, v_se, n_paths, ctx.seed()).with("eta", eta).with("q", q));
        out.records.push(EstimateRecord::new("functional_w1", exact, 0.0, n_paths, ctx.seed()).with("eta", eta).with("q", q));
        out.claims.push(Claim::within(
            "interpolation-functional",
            format!("sampled functional of W_1 within 3σ + 2% of the analytic one, η = {eta}, q = {q}"),
            exact,
            v,
            3.0 * v_se + 0.02 * exact,
        ));
    }
    Ok(out)
}

/// Node values `W_{s_k}` of every path, row-major `[path][node]`.
fn brownian_levels(inc: &Increments) -> Vec<f64> {
    (0..inc.n_paths).flat_map(|i| Increments::levels(inc.w_path(i), 1, 0)).collect()
}

pub fn bmo_fefferman(ctx: &Ctx) -> Result<Outcome, CliError> {
    ctx.only_params(&["fixtures"])?;
    let n_fixtures = ctx.count("fixtures", 20)?;
    let grid = ctx.grid(1.0, 64)?;
    let n_paths = ctx.n_paths(2000)?;
    let nodes = grid.n_nodes();
    let t_len = grid.t_end() - grid.t0();
    let mut out = Outcome::default();

    // A = C = 1: both sides are exact.
    let ones = vec![1.0; nodes];
    let rep = fefferman_check(&ones, &ones, &grid, 2.0, Conditioner::Deterministic)?;
    out.claims.push(Claim::within("bmo-fefferman", "A = C = 1: left side equals T", t_len, rep.lhs.value, 1e-12));
    out.claims.push(Claim::within("bmo-fefferman", "A = C = 1: right side equals 2T (p = 2)", 2.0 * t_len, rep.rhs, 1e-12));
    let zeros = vec![0.0; nodes];
    let rep = fefferman_check(&ones, &zeros, &grid, 2.0, Conditioner::Deterministic)?;
    out.claims.push(Claim::flag("bmo-fefferman", "C = 0: both sides vanish", rep.lhs.value == 0.0 && rep.rhs == 0.0));

    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let w = brownian_levels(&bundle.increments()?);
    // E(∫_s^T W_u² du | F_s) = W_s²(T−s) + (T−s)²/2 over the observed levels.
    let est = bmo_s2_norm(&w, &grid, Conditioner::MarkovState { state: &w, degree: 2 })?;
    let mut oracle: f64 = 0.0;
    for k in 0..nodes {
        let tail = grid.t_end() - grid.node(k);
        let m = (0..n_paths).map(|i| w[i * nodes + k].abs()).fold(0.0, f64::max);
        oracle = oracle.max(m * m * tail + tail * tail / 2.0);
    }
    let oracle = oracle.sqrt();
    out.records.push(EstimateRecord::from_lp("bmo_brownian", &est, ctx.seed()));
    out.records.push(EstimateRecord::new("bmo_brownian_conditional", oracle, 0.0, n_paths, ctx.seed()));
    out.claims.push(Claim::within("bmo-fefferman", "‖W‖_BMO(S₂) within 10% of its conditional-moment value", 0.0, (est.value - oracle).abs() / oracle, 0.1));

    let mut rng = ctx.fixture_rng(2);
    let mut worst = f64::INFINITY;
    for j in 0..n_fixtures {
        let (a0, a1, a2) = (rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        let p = rng.uniform(1.0, 4.0);
        let a: Vec<f64> = (0..n_paths)
            .flat_map(|i| {
                let w = &w;
                let grid = &grid;
                (0..nodes).map(move |k| a0 + a1 * w[i * nodes + k] + a2 * grid.node(k))
            })
            .collect();
        let rep = if j % 2 == 0 {
            // Deterministic piecewise-constant C with up to 4 pieces.
            let pieces = 1 + rng.below(4);
            let mut cuts: Vec<usize> = (0..pieces - 1).map(|_| rng.below(nodes)).collect();
            cuts.sort_unstable();
            let values: Vec<f64> = (0..pieces).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let row: Vec<f64> = (0..nodes).map(|k| values[cuts.iter().filter(|c| **c < k).count()]).collect();
            let c: Vec<f64> = (0..n_paths).flat_map(|_| row.iter().copied()).collect();
            fefferman_check(&a, &c, &grid, p, Conditioner::Deterministic)?
        } else {
            // Markov C = β tanh(W) + γ.
            let (beta, gamma) = (rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 1.0));
            let c: Vec<f64> = w.iter().map(|x| beta * x.tanh() + gamma).collect();
            fefferman_check(&a, &c, &grid, p, Conditioner::MarkovState { state: &w, degree: 3 })?
        };
        out.records.push(EstimateRecord::from_lp("fefferman_lhs", &rep.lhs, ctx.seed()).with("fixture", j as f64));
        out.records.push(EstimateRecord::new("fefferman_rhs", rep.rhs, rep.rhs_se, n_paths, ctx.seed()).with("fixture", j as f64).with("p", p));
        worst = worst.min(rep.margin);
        out.claims.push(Claim::flag("bmo-fefferman", format!("fixture {j}: ‖∫|AC|‖_p ≤ √(2p)‖(∫A²)^(1/2)‖_p‖C‖_BMO within 3σ, p = {p:.3}"), rep.holds));
    }
    if n_fixtures > 0 {
        out.records.push(EstimateRecord::new("fefferman_min_margin", worst, 0.0, n_paths, ctx.seed()));
    }
    Ok(out)
}

pub fn gr_lemma(ctx: &Ctx) -> Result<Outcome, CliError> {
    ctx.only_params(&["cases"])?;
    let n_cases = ctx.count("cases", 100)?;
    let mut rng = ctx.fixture_rng(3);
    let mut out = Outcome::default();
    let mut worst = [f64::INFINITY; 2];
    let mut all_ok = true;
    for j in 0..n_cases {
        let c = rng.uniform(0.0, 1.0);
        let s = c + rng.uniform(0.01, 2.0);
        let m = 2 + rng.below(49);
        let mut u: Vec<f64> = (0..m - 2).map(|_| rng.uniform(c, s)).collect();
        u.push(c);
        u.push(s);
        u.sort_by(f64::total_cmp);
        u.dedup();
        let scale = 10f64.powf(rng.uniform(-2.0, 1.0));
        let d: Vec<f64> = u.iter().map(|_| scale * rng.uniform(-1.0, 1.0)).collect();
        let params = if j % 2 == 0 {
            let p = rng.uniform(1.0, 6.0);
            let q = rng.uniform(1.0, p);
            GrParams { p, q, rho: rng.uniform(1.0, q), k: 1.0 }
        } else {
            let p = rng.uniform(1.05, 4.0);
            let q = p + rng.uniform(0.05, 4.0);
            GrParams { p, q, rho: rng.uniform(q - p + 1.0, q), k: 10f64.powf(rng.uniform(-2.0, 2.0)) }
        };
        let rep = gr_inequality_check(&u, &d, params)?;
        let slot = match rep.case {
            GrCase::First => 0,
            GrCase::Second => 1,
        };
        let rel = rep.margin / rep.rhs.abs().max(1.0);
        worst[slot] = worst[slot].min(rel);
        all_ok &= rep.ok;
        out.records.push(
            EstimateRecord::new("gr_margin", rep.margin, 0.0, 0, ctx.seed())
                .with("case", slot as f64 + 1.0)
                .with("p", params.p)
                .with("q", params.q)
                .with("rho", params.rho)
                .with("k", params.k),
        );
    }
    for (i, w) in worst.iter().enumerate() {
        if w.is_finite() {
            out.claims.push(Claim::at_least("gr-lemma", format!("smallest relative margin of inequality {}", i + 1), 0.0, *w, 1e-12));
        }
    }
    out.claims.push(Claim::flag("gr-lemma", format!("all {n_cases} random cases satisfy their inequality"), all_ok));
    Ok(out)
}
