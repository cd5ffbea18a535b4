use nalgebra::{DMatrix, SymmetricEigen};
use wiener_coupling::chaos::*;
use wiener_coupling::wiener::*;

/// Gauss–Hermite rule for the standard normal (probabilists' weight), by Golub–Welsch.
fn gauss_hermite(m: usize) -> Vec<(f64, f64)> {
    let mut j = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let b = (k as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    (0..m).map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2))).collect()
}

/// `E|f(G) − f(ρG + √(1−ρ²)G')|²` by a tensor Gauss–Hermite rule.
fn bivariate_oracle(f: impl Fn(f64) -> f64, rho: f64) -> f64 {
    let rule = gauss_hermite(40);
    let s = (1.0 - rho * rho).sqrt();
    let mut acc = 0.0;
    for &(x, wx) in &rule {
        for &(y, wy) in &rule {
            acc += wx * wy * (f(x) - f(rho * x + s * y)).powi(2);
        }
    }
    acc
}

#[test]
fn exact_coupled_moments_match_a_quadrature_oracle() {
    let cases: Vec<(ChaosVariable, Box<dyn Fn(f64) -> f64>)> = vec![
        (ChaosVariable::brownian_terminal(1.0).unwrap(), Box::new(|x| x)),
        (ChaosVariable::hermite_of_window(2, 0.0, 1.0).unwrap(), Box::new(|x| x * x - 1.0)),
        (ChaosVariable::hermite_of_window(3, 0.0, 1.0).unwrap(), Box::new(|x| x.powi(3) - 3.0 * x)),
    ];
    for (xi, f) in &cases {
        for r in [0.1, 0.3, 0.5, 0.8, 1.0] {
            let exact = coupled_second_moment_exact(&xi.spectrum(), r).unwrap();
            let oracle = bivariate_oracle(f, (1.0f64 - r * r).sqrt());
            assert!((exact - oracle).abs() < 1e-9 * (1.0 + oracle), "r={r}: {exact} vs {oracle}");
        }
    }
    let sq = ChaosVariable::hermite_of_window(2, 0.0, 1.0).unwrap();
    assert!((coupled_second_moment_exact(&sq.spectrum(), 0.5).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn squared_terminal_value_has_variance_two() {
    let grid = make_grid(0.0, 1.0, 4).unwrap();
    let b = sample_bundle(&grid, 1, 100_000, 17).unwrap();
    let xi = ChaosVariable::hermite_of_window(2, 0.0, 1.0).unwrap();
    let v = evaluate(&xi, &b, &CouplingFunction::identity()).unwrap();
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    let m = wiener_coupling::stats::batch_mean(&sq);
    assert!(m.within(2.0, 4.0), "{m:?}");
    assert_eq!(xi.spectrum().variance(), 2.0);
}

#[test]
fn monte_carlo_coupled_moment_agrees_with_the_multiplier() {
    let grid = make_grid(0.0, 1.0, 4).unwrap();
    let b = sample_bundle(&grid, 1, 50_000, 3).unwrap();
    let xi = ChaosVariable::hermite_of_window(3, 0.0, 1.0).unwrap();
    for r in [0.3, 0.8] {
        let mc = coupled_second_moment_mc(&xi, &b, r).unwrap();
        let exact = coupled_second_moment_exact(&xi.spectrum(), r).unwrap();
        assert!(mc.within(exact, 4.0), "r={r}: {mc:?} vs {exact}");
    }
}

#[test]
fn d12_profile_brackets_the_malliavin_norm() {
    let grid = make_grid(0.0, 1.0, 4).unwrap();
    let b = sample_bundle(&grid, 1, 20_000, 8).unwrap();
    let xi = ChaosVariable::hermite_of_window(2, 0.0, 1.0).unwrap();
    let r: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let prof = d12_ratio_profile(&xi, &b, &r).unwrap();
    assert!(prof.lower_bracket_ok && prof.upper_bracket_ok);
    // ‖Dξ‖² = Σ n a_n = 2·2.
    assert!((prof.malliavin_norm - 2.0).abs() < 1e-12);
    assert!(prof.agrees);
}
