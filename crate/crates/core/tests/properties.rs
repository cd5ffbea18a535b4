use proptest::prelude::*;
use wiener_coupling::chaos::*;
use wiener_coupling::estimators::*;
use wiener_coupling::sde::*;
use wiener_coupling::wiener::*;

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..10.0f64, 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn multiplier_lemma_holds_for_random_spectra(a in spectrum()) {
        let s = ChaosSpectrum::from_orders(&a).unwrap();
        let r: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        let rep = lemma_multiplier_bounds(&s, &r);
        prop_assert!(rep.c1_ok && rep.c2_ok && rep.per_order_ok, "{:?}", rep);
        prop_assert!(rep.min_margin_c1 >= -1e-12 && rep.min_margin_c2 >= -1e-12 && rep.min_margin_per_order >= -1e-12);
    }

    #[test]
    fn coupled_moment_is_monotone_in_r(a in spectrum(), r1 in 0.0..1.0f64, r2 in 0.0..1.0f64) {
        let s = ChaosSpectrum::from_orders(&a).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let (m_lo, m_hi) = (coupled_second_moment_exact(&s, lo).unwrap(), coupled_second_moment_exact(&s, hi).unwrap());
        prop_assert!(m_lo <= m_hi + 1e-12);
        prop_assert!((coupled_second_moment_exact(&s, 1.0).unwrap() - 2.0 * s.variance()).abs() < 1e-9 * (1.0 + s.variance()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn coupling_is_linear_in_the_driver_pair(
        phi in prop::collection::vec(0.0..=1.0f64, 8),
        dw in prop::collection::vec(-1.0..1.0f64, 8),
        dwp in prop::collection::vec(-1.0..1.0f64, 8),
        ew in prop::collection::vec(-1.0..1.0f64, 8),
        ewp in prop::collection::vec(-1.0..1.0f64, 8),
        lambda in -2.0..2.0f64,
    ) {
        let w = CouplingWeights::from_values(phi);
        let run = |a: &[f64], b: &[f64]| { let mut o = vec![0.0; 8]; w.couple_into(1, a, b, &mut o); o };
        let sum_w: Vec<f64> = dw.iter().zip(&ew).map(|(x, y)| x + lambda * y).collect();
        let sum_wp: Vec<f64> = dwp.iter().zip(&ewp).map(|(x, y)| x + lambda * y).collect();
        let (u, v, s) = (run(&dw, &dwp), run(&ew, &ewp), run(&sum_w, &sum_wp));
        for k in 0..8 {
            prop_assert!((s[k] - (u[k] + lambda * v[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn gr_inequalities_hold_for_piecewise_linear_functions(
        knots in prop::collection::vec(-3.0..3.0f64, 2..8),
        len in 0.01..2.0f64,
        second in any::<bool>(),
        p in 1.0..4.0f64,
        tq in 0.0..1.0f64,
        trho in 0.0..1.0f64,
        k in 0.05..20.0f64,
    ) {
        let m = 200;
        let u: Vec<f64> = (0..=m).map(|i| len * i as f64 / m as f64).collect();
        let d: Vec<f64> = u.iter().map(|x| {
            let pos = x / len * (knots.len() - 1) as f64;
            let i = (pos.floor() as usize).min(knots.len() - 2);
            let t = pos - i as f64;
            knots[i] * (1.0 - t) + knots[i + 1] * t
        }).collect();
        let params = if second {
            let p = 1.0 + p * 0.75;
            let q = p + 0.05 + tq * 3.0;
            let rho = (q - p + 1.0) + trho * (p - 1.0);
            GrParams { p, q, rho, k }
        } else {
            let q = 1.0 + tq * (p - 1.0);
            let rho = 1.0 + trho * (q - 1.0);
            GrParams { p, q, rho, k }
        };
        let rep = gr_inequality_check(&u, &d, params).unwrap();
        prop_assert!(rep.ok && rep.margin >= -1e-12 * rep.rhs.abs().max(1.0), "{:?} {:?}", params, rep);
    }
}

#[test]
fn sweep_is_identical_across_thread_counts() {
    let grid = make_grid(0.0, 1.0, 128).unwrap();
    let b = sample_bundle(&grid, 1, 3000, 41).unwrap();
    let m = Preset::from_pairs("cir", &[]).unwrap();
    let sc = vec![Scenario::cut_off(0.25, 0.5).unwrap(), Scenario::new(CouplingFunction::constant(0.3).unwrap())];
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| coupled_sweep(&m, &InitialCondition::scalar(1.0), &b, &sc).unwrap())
    };
    let (one, four) = (run(1), run(4));
    assert_eq!(one, four);
    let e1 = LpEstimate::from_samples(&one.scenarios[0].sup, 2.0).unwrap();
    let e4 = LpEstimate::from_samples(&four.scenarios[0].sup, 2.0).unwrap();
    assert_eq!(e1.value.to_bits(), e4.value.to_bits());
    assert_eq!(e1.std_error.to_bits(), e4.std_error.to_bits());
}
