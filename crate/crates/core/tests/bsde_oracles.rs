use wiener_coupling::bsde::*;
use wiener_coupling::sde::*;
use wiener_coupling::stats::batch_mean;
use wiener_coupling::wiener::*;

fn brownian(n_paths: usize, seed: u64) -> (PathEnsemble, Vec<f64>, BrownianBundle) {
    let grid = make_grid(0.0, 1.0, 64).unwrap();
    let b = sample_bundle(&grid, 1, n_paths, seed).unwrap();
    let inc = b.increments().unwrap();
    let x = euler_solve(&FnModel::constant(0.0, 1.0), &InitialCondition::scalar(0.0), Driver { grid: &grid, dim: 1, increments: &inc.w })
        .unwrap();
    (x, inc.w, b)
}

#[test]
fn identity_terminal_recovers_unit_integrand() {
    let (x, inc, _) = brownian(20_000, 1);
    let sol = lsmc_solve(&BsdeModel::identity(), &x, &inc, DEFAULT_DEGREE).unwrap();
    for k in 0..64 {
        let z = batch_mean(sol.z_at(k));
        assert!((z.mean - 1.0).abs() < 0.05, "Z at step {k}: {z:?}");
    }
    for k in [0, 16, 32, 63] {
        let w = x.node_values(k, 0);
        let err = sol.y_at(k).iter().zip(&w).map(|(y, w)| (y - w).abs()).fold(0.0, f64::max);
        assert!(err < 0.05, "Y at node {k}: {err}");
    }
    assert_eq!(sol.y_at(64), x.terminal(0).as_slice());
}

#[test]
fn constant_terminal_gives_constant_solution() {
    let (x, inc, _) = brownian(2000, 2);
    let sol = lsmc_solve(&BsdeModel::constant(3.0), &x, &inc, DEFAULT_DEGREE).unwrap();
    // The ridge penalty shrinks each fit by a relative 1e−8.
    assert!(sol.y.iter().all(|y| (y - 3.0).abs() < 1e-5));
    assert!(sol.z.iter().all(|z| z.abs() < 1e-5));
}

#[test]
fn linear_driver_matches_its_closed_form() {
    // f(y) = −y, g(x) = x, X = W: Y_s = e^{−(T−s)} W_s and Z_s = e^{−(T−s)}.
    let (x, inc, _) = brownian(20_000, 3);
    let sol = lsmc_solve(&BsdeModel::linear_discount(1.0), &x, &inc, DEFAULT_DEGREE).unwrap();
    for k in [0, 16, 32, 48] {
        let s = x.grid.node(k);
        let factor = (-(1.0 - s)).exp();
        let w = x.node_values(k, 0);
        let rel: Vec<f64> = sol.y_at(k).iter().zip(&w).filter(|(_, w)| w.abs() > 0.2).map(|(y, w)| y / (factor * w)).collect();
        if !rel.is_empty() {
            let m = batch_mean(&rel);
            assert!((m.mean - 1.0).abs() < 0.05, "node {k}: {m:?}");
        }
        // Z on the step (s_k, s_{k+1}] projects Y_{k+1}.
        let z = batch_mean(sol.z_at(k));
        let z_target = (-(1.0 - x.grid.node(k + 1))).exp();
        assert!((z.mean / z_target - 1.0).abs() < 0.05, "Z at node {k}: {z:?}");
    }
}

#[test]
fn variation_of_the_identity_solution_has_exponent_one_half() {
    let (x, inc, _) = brownian(5000, 4);
    let sol = lsmc_solve(&BsdeModel::identity(), &x, &inc, DEFAULT_DEGREE).unwrap();
    for k in 1..=4 {
        let len = 0.5f64.powi(k);
        let (_, zvar) = bsde_variation(&sol, 0.25, 0.25 + len, 2.0).unwrap();
        assert!((zvar.value / len.sqrt() - 1.0).abs() < 0.05, "len {len}: {zvar:?}");
    }
    let flat = lsmc_solve(&BsdeModel::constant(1.0), &x, &inc, DEFAULT_DEGREE).unwrap();
    let (y, z) = bsde_variation(&flat, 0.25, 0.5, 2.0).unwrap();
    assert!(y.value < 1e-5 && z.value < 1e-5);
}

#[test]
fn coupled_identity_solution_reduces_to_brownian_coupling() {
    let (x, inc, b) = brownian(20_000, 5);
    let model = BsdeModel::identity();
    let sol = lsmc_solve(&model, &x, &inc, DEFAULT_DEGREE).unwrap();
    let same = sol.evaluate_on(&model, &x).unwrap();
    let (dy, dz) = bsde_coupling_distance(&sol, &same, 2.0).unwrap();
    assert_eq!((dy.value, dz.value), (0.0, 0.0));

    let (a, c) = (0.25, 0.5);
    let (_, xp) = coupled_solve(&FnModel::constant(0.0, 1.0), &InitialCondition::scalar(0.0), &b, &CouplingFunction::indicator(a, c).unwrap())
        .unwrap();
    let coupled = sol.evaluate_on(&model, &xp).unwrap();
    let d: Vec<f64> = sol.y_at(64).iter().zip(coupled.y_at(64)).map(|(u, v)| (u - v).powi(2)).collect();
    let m = batch_mean(&d);
    assert!(m.within(2.0 * (c - a), 4.0), "{m:?}");
}
