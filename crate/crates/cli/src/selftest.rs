//! Deterministic algebraic checks, no Monte Carlo.

use wiener_coupling::chaos::{coupled_second_moment_exact, lemma_multiplier_bounds, malliavin_norm_exact, ChaosSpectrum};
use wiener_coupling::estimators::{equivalence_brackets, fefferman_check, gr_inequality_check, interpolation_functional, Conditioner, GrParams};
use wiener_coupling::wiener::{make_grid, CouplingFunction};

use crate::experiments::forward::sharpness_constant;
use crate::quadrature::interpolation_oracle;

type Check = fn() -> Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn chaos_multiplier() -> Result<(), String> {
    // Order 2, a_2 = Var(W²−1) = 2 and r = 1/2: 2·(1 − 3/4)·2 = 1.
    let s = ChaosSpectrum::single(2, 2.0).map_err(err)?;
    let v = coupled_second_moment_exact(&s, 0.5).map_err(err)?;
    ensure((v - 1.0).abs() < 1e-14, || format!("E|ξ−ξ^r|² = {v}, expected 1"))?;
    let one = ChaosSpectrum::single(1, 1.0).map_err(err)?;
    let v = coupled_second_moment_exact(&one, 1.0).map_err(err)?;
    ensure((v - 2.0).abs() < 1e-14, || format!("W_1 at r = 1 gives {v}, expected 2"))?;
    let n = malliavin_norm_exact(&s);
    ensure((n - 2.0).abs() < 1e-14, || format!("‖D(W²−1)‖ = {n}, expected 2"))
}

fn multiplier_lemma() -> Result<(), String> {
    let r: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
    for a in [vec![1.0], vec![0.0, 3.0, 0.0, 1e-3], vec![5.0, 4.0, 3.0, 2.0, 1.0, 0.5]] {
        let rep = lemma_multiplier_bounds(&ChaosSpectrum::from_orders(&a).map_err(err)?, &r);
        ensure(rep.c1_ok && rep.c2_ok && rep.per_order_ok, || format!("spectrum {a:?}: {rep:?}"))?;
    }
    Ok(())
}

fn coupling_weights() -> Result<(), String> {
    let grid = make_grid(0.0, 1.0, 8).map_err(err)?;
    let w = CouplingFunction::indicator(0.25, 0.5).map_err(err)?.weights(&grid).map_err(err)?;
    let expect = [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    ensure(w.phi == expect, || format!("indicator weights {:?}", w.phi))?;
    ensure(CouplingFunction::indicator(0.3, 0.5).map_err(err)?.weights(&grid).is_err(), || "off-grid breakpoint accepted".into())
}

fn interpolation() -> Result<(), String> {
    let got = interpolation_functional(|r| r, 0.5, 1.0).map_err(err)?;
    let oracle = interpolation_oracle(&|r| r, 0.5, 1.0);
    ensure(((got - oracle) / oracle).abs() < 1e-6, || format!("{got} vs {oracle}"))?;
    let grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
    let rep = equivalence_brackets(0.5, &grid).map_err(err)?;
    ensure(rep.ok, || format!("{rep:?}"))
}

fn fefferman() -> Result<(), String> {
    let grid = make_grid(0.0, 1.0, 16).map_err(err)?;
    let ones = vec![1.0; 17];
    let rep = fefferman_check(&ones, &ones, &grid, 2.0, Conditioner::Deterministic).map_err(err)?;
    ensure((rep.lhs.value - 1.0).abs() < 1e-12 && (rep.rhs - 2.0).abs() < 1e-12, || format!("{rep:?}"))
}

fn gr_inequalities() -> Result<(), String> {
    let u: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let d: Vec<f64> = u.iter().map(|x| (6.0 * x).sin() * 3.0).collect();
    for params in [GrParams { p: 3.0, q: 2.0, rho: 1.5, k: 1.0 }, GrParams { p: 2.0, q: 3.0, rho: 2.5, k: 0.7 }] {
        let rep = gr_inequality_check(&u, &d, params).map_err(err)?;
        ensure(rep.ok, || format!("{params:?}: {rep:?}"))?;
    }
    Ok(())
}

fn sharpness() -> Result<(), String> {
    // θ = 1/2, p = 2: ((2·1)/2)^{1/1} = 1, so c_2 = ((1/4)√(2/π))^{1/2}.
    let c = sharpness_constant(0.5, 2.0);
    let expect = (0.25 * (2.0 / std::f64::consts::PI).sqrt()).sqrt();
    ensure((c - expect).abs() < 1e-15, || format!("c_2 = {c}, expected {expect}"))
}

pub const CHECKS: &[(&str, Check)] = &[
    ("chaos multiplier formula", chaos_multiplier),
    ("multiplier lemma on fixed spectra", multiplier_lemma),
    ("cut-off coupling weights", coupling_weights),
    ("interpolation functional and brackets", interpolation),
    ("Fefferman constant example", fefferman),
    ("integral inequalities", gr_inequalities),
    ("sharpness constant", sharpness),
];

/// Run every check, returning `(name, error)` for the failures.
pub fn run() -> Vec<(&'static str, Option<String>)> {
    CHECKS.iter().map(|(name, f)| (*name, f().err())).collect()
}
