use wiener_coupling::estimators::{lp_sup_distance, LpEstimate};
use wiener_coupling::sde::*;
use wiener_coupling::stats::batch_mean;
use wiener_coupling::wiener::*;

fn moments(v: &[f64], f: impl Fn(f64) -> f64) -> wiener_coupling::stats::MeanEstimate {
    batch_mean(&v.iter().map(|x| f(*x)).collect::<Vec<_>>())
}

#[test]
fn geometric_brownian_moments() {
    // dX = μX ds + σX dW, X_0 = 1: E X_T = e^{μT}, E X_T² = e^{(2μ+σ²)T}.
    let grid = make_grid(0.0, 1.0, 256).unwrap();
    let b = sample_bundle(&grid, 1, 40_000, 1).unwrap();
    let m = Preset::from_pairs("linear", &[]).unwrap();
    let r = coupled_sweep(&m, &InitialCondition::scalar(1.0), &b, &[]).unwrap();
    assert!(moments(&r.terminal, |x| x).within(0.1f64.exp(), 4.0));
    assert!(moments(&r.terminal, |x| x * x).within(0.24f64.exp(), 4.0));
}

#[test]
fn cir_mean_reverts_to_its_stationary_mean() {
    // E X_T = x₀e^{−BT} + (A/B)(1 − e^{−BT}) = 1 for A = B = x₀ = 1.
    let grid = make_grid(0.0, 1.0, 256).unwrap();
    let b = sample_bundle(&grid, 1, 40_000, 2).unwrap();
    let m = Preset::from_pairs("cir", &[]).unwrap();
    let r = coupled_sweep(&m, &InitialCondition::scalar(1.0), &b, &[]).unwrap();
    assert!(moments(&r.terminal, |x| x).within(1.0, 4.0));
    let m2 = Preset::from_pairs("cir", &[("a", 2.0)]).unwrap();
    let r2 = coupled_sweep(&m2, &InitialCondition::scalar(0.5), &b, &[]).unwrap();
    let target = 0.5 * (-1f64).exp() + 2.0 * (1.0 - (-1f64).exp());
    assert!(moments(&r2.terminal, |x| x).within(target, 4.0));
}

#[test]
fn coupled_process_has_the_same_marginals() {
    let grid = make_grid(0.0, 1.0, 128).unwrap();
    let b = sample_bundle(&grid, 1, 30_000, 4).unwrap();
    let m = Preset::from_pairs("cir", &[]).unwrap();
    let phi = CouplingFunction::indicator(0.25, 0.5).unwrap();
    let (x, xp) = coupled_solve(&m, &InitialCondition::scalar(1.0), &b, &phi).unwrap();
    for k in [32, 64, 128] {
        let (u, v) = (x.node_values(k, 0), xp.node_values(k, 0));
        let diff: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
        let diff2: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a * a - b * b).collect();
        assert!(batch_mean(&diff).within(0.0, 4.0), "mean at node {k}");
        assert!(batch_mean(&diff2).within(0.0, 4.0), "second moment at node {k}");
    }
}

#[test]
fn driftless_holder_model_preserves_the_first_absolute_moment() {
    // σ = 1 on [0, c] then |x|^θ: X_c = W_c and E|X_T| = E|W_c| = √(2c/π).
    let c = 0.25;
    // Euler paths overshoot 0 and bias E|X_T| upward by O(√h); a fine grid keeps it below the MC error.
    let grid = make_grid(0.0, 1.0, 8192).unwrap();
    let b = sample_bundle(&grid, 1, 20_000, 6).unwrap();
    let m = Preset::from_pairs("holder_power", &[("theta", 0.5), ("switch", c)]).unwrap();
    let r = coupled_sweep(&m, &InitialCondition::scalar(0.0), &b, &[]).unwrap();
    let target = (2.0 * c / std::f64::consts::PI).sqrt();
    let m = moments(&r.terminal, f64::abs);
    assert!(m.within(target, 4.0), "{m:?} vs {target}");
}

#[test]
fn paths_agree_exactly_before_the_coupling_window() {
    let grid = make_grid(0.0, 1.0, 64).unwrap();
    let b = sample_bundle(&grid, 1, 200, 7).unwrap();
    for name in ["linear", "cir", "holder_power"] {
        let m = Preset::from_pairs(name, &[]).unwrap();
        let (x, xp) = coupled_solve(&m, &InitialCondition::scalar(1.0), &b, &CouplingFunction::indicator(0.5, 0.75).unwrap()).unwrap();
        for i in 0..200 {
            assert_eq!(x.path(i)[..=32], xp.path(i)[..=32], "{name} path {i}");
        }
        assert_ne!(x.terminal(0), xp.terminal(0));
    }
}

#[test]
fn brownian_sup_distance_dominates_the_terminal_distance() {
    let grid = make_grid(0.0, 1.0, 256).unwrap();
    let b = sample_bundle(&grid, 1, 20_000, 12).unwrap();
    let m = FnModel::constant(0.0, 1.0);
    let (a, c) = (0.25, 0.5);
    let (x, xp) = coupled_solve(&m, &InitialCondition::scalar(0.0), &b, &CouplingFunction::indicator(a, c).unwrap()).unwrap();
    let sup = lp_sup_distance(&x, &xp, 2.0).unwrap();
    let term: Vec<f64> = x.terminal(0).iter().zip(xp.terminal(0)).map(|(u, v)| (u - v).abs()).collect();
    let t = LpEstimate::from_samples(&term, 2.0).unwrap();
    let exact = (2.0 * (c - a)).sqrt();
    assert!((t.value - exact).abs() < 4.0 * t.std_error, "{t:?}");
    assert!(sup.value >= exact - 3.0 * sup.std_error);
}

#[test]
fn halving_the_step_keeps_distances_within_error() {
    let sweep = |n: usize| {
        let grid = make_grid(0.0, 1.0, n).unwrap();
        let b = sample_bundle(&grid, 1, 20_000, 31).unwrap();
        let m = Preset::from_pairs("linear", &[]).unwrap();
        let r = coupled_sweep(&m, &InitialCondition::scalar(1.0), &b, &[Scenario::cut_off(0.25, 0.5).unwrap()]).unwrap();
        LpEstimate::from_samples(&r.scenarios[0].terminal, 2.0).unwrap()
    };
    let (coarse, fine) = (sweep(256), sweep(512));
    let se = coarse.std_error.hypot(fine.std_error);
    assert!((coarse.value - fine.value).abs() < 4.0 * se, "{coarse:?} vs {fine:?}");
}

#[test]
fn lamperti_transform_of_cir_paths() {
    let grid = make_grid(0.0, 1.0, 64).unwrap();
    let b = sample_bundle(&grid, 1, 100, 5).unwrap();
    let m = Preset::from_pairs("cir", &[]).unwrap();
    let (x, _) = coupled_solve(&m, &InitialCondition::scalar(4.0), &b, &CouplingFunction::identity()).unwrap();
    let y = lamperti_cir(&x);
    assert_eq!(y.path(0)[0], 2.0);
    for (u, v) in x.states.iter().zip(&y.states) {
        assert_eq!(*v, u.max(0.0).sqrt());
    }
}
