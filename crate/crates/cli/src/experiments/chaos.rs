use wiener_coupling::chaos::{
    coupled_second_moment_exact, coupled_second_moment_mc, d12_ratio_profile, lemma_multiplier_bounds, ChaosSpectrum,
    ChaosVariable, DEFAULT_MAX_ORDER,
};
use wiener_coupling::record::EstimateRecord;
use wiener_coupling::wiener::{make_grid, sample_bundle, CouplingFunction};

use super::Ctx;
use crate::config::Sweep;
use crate::outcome::{Claim, Outcome};
use crate::CliError;

const R_DEFAULT: [f64; 5] = [0.1, 0.3, 0.5, 0.8, 1.0];

fn test_variables() -> Result<Vec<(u32, ChaosVariable)>, CliError> {
    Ok(vec![
        (1, ChaosVariable::brownian_terminal(1.0)?),
        (2, ChaosVariable::hermite_of_window(2, 0.0, 1.0)?),
        (3, ChaosVariable::hermite_of_window(3, 0.0, 1.0)?),
    ])
}

pub fn chaos_identity(ctx: &Ctx) -> Result<Outcome, CliError> {
    let n_paths = ctx.n_paths(1_000_000)?;
    let r_list: Vec<f64> = match &ctx.config.sweep {
        None => R_DEFAULT.to_vec(),
        Some(Sweep::Couplings { phi }) => phi
            .iter()
            .map(|f| match f {
                CouplingFunction::Constant { r } => Ok(*r),
                other => Err(CliError::Config(format!("chaos-identity sweeps constant couplings only, got {other:?}"))),
            })
            .collect::<Result<_, _>>()?,
        Some(other) => return Err(CliError::Config(format!("chaos-identity needs a list of constant couplings, got {other:?}"))),
    };
    let grid = make_grid(0.0, 1.0, 1)?;
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let mut out = Outcome::default();
    for (order, xi) in test_variables()? {
        for &r in &r_list {
            let mc = coupled_second_moment_mc(&xi, &bundle, r)?;
            let exact = coupled_second_moment_exact(&xi.spectrum(), r)?;
            out.records.push(
                EstimateRecord::new("coupled_second_moment", mc.mean, mc.std_error, n_paths, ctx.seed())
                    .with("order", order as f64)
                    .with("r", r),
            );
            out.records.push(
                EstimateRecord::new("coupled_second_moment_exact", exact, 0.0, n_paths, ctx.seed())
                    .with("order", order as f64)
                    .with("r", r),
            );
            out.claims.push(Claim::within(
                "chaos-multiplier-identity",
                format!("E|ξ−ξ^r|² = 2Σ[1−(1−r²)^(n/2)]a_n for He_{order}, r = {r}, within 4 standard errors"),
                exact,
                mc.mean,
                4.0 * mc.std_error,
            ));
        }
    }
    Ok(out)
}

pub fn d12_profile(ctx: &Ctx) -> Result<Outcome, CliError> {
    ctx.only_params(&["spectra", "max_order", "r_points"])?;
    let n_spectra = ctx.count("spectra", 1000)?;
    let max_order = ctx.count("max_order", DEFAULT_MAX_ORDER)?.max(1);
    let r_points = ctx.count("r_points", 100)?.max(1);
    let n_paths = ctx.n_paths(100_000)?;
    let r_grid: Vec<f64> = (1..=r_points).map(|i| i as f64 / r_points as f64).collect();

    let mut out = Outcome::default();
    let mut rng = ctx.fixture_rng(1);
    let (mut worst_c1, mut worst_c2, mut worst_order) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut all_ok = true;
    for _ in 0..n_spectra {
        // Magnitudes over several decades, with some orders switched off.
        let a: Vec<f64> = (0..max_order)
            .map(|_| if rng.uniform(0.0, 1.0) < 0.3 { 0.0 } else { rng.uniform(0.0, 1.0) * 10f64.powf(rng.uniform(-3.0, 2.0)) })
            .collect();
        let rep = lemma_multiplier_bounds(&ChaosSpectrum::from_orders(&a)?, &r_grid);
        all_ok &= rep.c1_ok && rep.c2_ok && rep.per_order_ok;
        worst_c1 = worst_c1.min(rep.min_margin_c1);
        worst_c2 = worst_c2.min(rep.min_margin_c2);
        worst_order = worst_order.min(rep.min_margin_per_order);
    }
    for (name, m) in [("c1", worst_c1), ("c2", worst_c2), ("per_order", worst_order)] {
        out.records.push(EstimateRecord::new(format!("lemma_min_margin_{name}"), m, 0.0, n_spectra, ctx.seed()));
        out.claims.push(Claim::at_least(
            "d12-multiplier-lemma",
            format!("smallest {name} margin over {n_spectra} random spectra and {r_points} r values"),
            0.0,
            m,
            1e-12,
        ));
    }
    out.claims.push(Claim::flag("d12-multiplier-lemma", "every spectrum passes both directions", all_ok));

    let grid = make_grid(0.0, 1.0, 1)?;
    let bundle = sample_bundle(&grid, 1, n_paths, ctx.seed())?;
    let xi = ChaosVariable::hermite_of_window(2, 0.0, 1.0)?;
    let profile_r: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let prof = d12_ratio_profile(&xi, &bundle, &profile_r)?;
    for ((r, mc), exact) in prof.r.iter().zip(&prof.mc).zip(&prof.exact) {
        out.records.push(EstimateRecord::from_lp("d12_ratio", mc, ctx.seed()).with("r", *r));
        out.records.push(EstimateRecord::new("d12_ratio_exact", *exact, 0.0, n_paths, ctx.seed()).with("r", *r));
    }
    out.claims.push(Claim::flag("d12-characterization", "MC profile of W_1²−1 within 3 standard errors of the exact one", prof.agrees));
    out.claims.push(Claim::at_least("d12-characterization", "sup_r ‖ξ−ξ^r‖₂/r ≥ ‖Dξ‖/2", 0.5 * prof.malliavin_norm, prof.sup_exact(), 0.0));
    out.claims.push(Claim::at_most("d12-characterization", "sup_r ‖ξ−ξ^r‖₂/r ≤ √2‖Dξ‖", 2f64.sqrt() * prof.malliavin_norm, prof.sup_exact(), 0.0));
    Ok(out)
}
