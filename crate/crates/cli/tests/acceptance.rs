//! Acceptance suite: one line per criterion, at the pinned sample sizes.
//! Run with `cargo test -p wiener-coupling-cli --test acceptance`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use wcouple::config::ExperimentConfig;
use wcouple::outcome::{Claim, Outcome};
use wcouple::{output, run_with_threads};

const SEED: u64 = 7;

struct Verdict {
    pass: bool,
    detail: String,
}

fn out_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name)
}

fn run(config: ExperimentConfig) -> (Outcome, f64) {
    let t = Instant::now();
    let outcome = run_with_threads(&config, None).unwrap_or_else(|e| panic!("{}: {e}", config.experiment));
    let secs = t.elapsed().as_secs_f64();
    output::write_outputs(&out_dir(&config.experiment), &config, &outcome, false).expect("write results");
    (outcome, secs)
}

fn default_run(name: &str) -> (Outcome, f64) {
    run(ExperimentConfig::new(name, SEED))
}

fn claims<'a>(o: &'a Outcome, id: &str) -> Vec<&'a Claim> {
    o.claims.iter().filter(|c| c.paper_claim_id == id).collect()
}

fn failing(cs: &[&Claim]) -> String {
    let bad: Vec<String> = cs.iter().filter(|c| !c.pass).map(|c| format!("[{}: measured {:.4}]", c.description, c.measured)).collect();
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", bad.join(" "))
    }
}

fn all(cs: &[&Claim]) -> bool {
    !cs.is_empty() && cs.iter().all(|c| c.pass)
}

fn chaos_identity() -> Verdict {
    let mut c = ExperimentConfig::new("chaos-identity", SEED);
    c.n_paths = Some(1_000_000);
    let (o, secs) = run(c);
    let cs = claims(&o, "chaos-multiplier-identity");
    let worst = cs.iter().map(|c| (c.measured - c.expected_exponent_or_value).abs() / (c.tolerance / 4.0)).fold(0.0, f64::max);
    Verdict {
        pass: all(&cs) && cs.len() == 15 && secs < 60.0,
        detail: format!("{} cases, worst |MC − exact| = {worst:.2}σ (limit 4σ), {secs:.1}s (limit 60s){}", cs.len(), failing(&cs)),
    }
}

fn multiplier_lemma() -> Verdict {
    let (o, _) = default_run("d12-profile");
    let cs = claims(&o, "d12-multiplier-lemma");
    let margin = cs.iter().filter(|c| c.tolerance > 0.0).map(|c| c.measured).fold(f64::INFINITY, f64::min);
    Verdict {
        pass: all(&cs),
        detail: format!("1000 spectra × 100 r values, smallest margin {margin:.3e} (limit −1e−12){}", failing(&cs)),
    }
}

fn lipschitz_rate() -> Verdict {
    let (o, secs) = default_run("lipschitz-rate");
    let cs = claims(&o, "lipschitz-cutoff-rate");
    let fit = &o.rate_fits[0].fit;
    Verdict {
        pass: all(&cs),
        detail: format!("slope {:.4} ± {:.4} (target 0.50 ± 0.05), {secs:.0}s{}", fit.slope, fit.slope_se, failing(&cs)),
    }
}

fn holder_rate() -> Verdict {
    let (o, secs) = default_run("holder-rate");
    let slope = claims(&o, "holder-cutoff-rate");
    let lower = claims(&o, "holder-sharpness-lower-bound");
    let fit = &o.rate_fits[0].fit;
    let ratios: Vec<String> = lower.iter().map(|c| format!("{:.2}", c.measured)).collect();
    Verdict {
        pass: all(&slope) && all(&lower),
        detail: format!(
            "(i) slope {:.4} ± {:.4} (target 0.125 ± 0.05) {}; (ii) {}/{} estimates above c_p c^0.125 − 3σ, e = [{}]; {secs:.0}s",
            fit.slope,
            fit.slope_se,
            if all(&slope) { "pass" } else { "FAIL" },
            lower.iter().filter(|c| c.pass).count(),
            lower.len(),
            ratios.join(", ")
        ),
    }
}

fn small_interval() -> Verdict {
    let (o, _) = default_run("small-interval");
    let cs = claims(&o, "small-interval-universal-bound");
    let worst = cs.iter().map(|c| c.measured).fold(0.0, f64::max);
    Verdict {
        pass: all(&cs) && cs.len() == 9,
        detail: format!("{} (preset, p) pairs, largest max/min ratio {worst:.3} (limit 1.2){}", cs.len(), failing(&cs)),
    }
}

fn counterexample() -> Verdict {
    let (o, _) = default_run("counterexample-blowup");
    let cs = claims(&o, "counterexample-blowup");
    let levels: Vec<String> = o.records.iter().filter(|r| r.name == "level_ratio").map(|r| format!("{:.3}±{:.3}", r.value, r.std_error)).collect();
    let steps: Vec<String> = cs.iter().map(|c| format!("{:.1}σ", c.measured)).collect();
    Verdict {
        pass: all(&cs),
        detail: format!("level ratios [{}], increments [{}] (need ≥ 2σ each)", levels.join(", "), steps.join(", ")),
    }
}

fn besov_interpolation() -> Verdict {
    let (b, _) = default_run("besov-phi-alpha");
    let (i, _) = default_run("interpolation-functional");
    let phi = claims(&b, "besov-phi2-brownian");
    let quad: Vec<&Claim> = claims(&i, "interpolation-functional").into_iter().filter(|c| c.tolerance == 1e-6).collect();
    let eq = claims(&i, "interpolation-equivalence");
    let gap = quad.iter().map(|c| c.measured).fold(0.0, f64::max);
    Verdict {
        pass: all(&phi) && quad.len() == 3 && all(&quad) && all(&eq),
        detail: format!(
            "Φ₂(W_T) = {:.4} (√2 ± {:.4}); quadrature gap {gap:.2e} (limit 1e−6); brackets {}{}{}",
            phi[0].measured,
            phi[0].tolerance,
            if all(&eq) { "hold" } else { "FAIL" },
            failing(&phi),
            failing(&quad)
        ),
    }
}

fn bmo_fefferman() -> Verdict {
    let (o, _) = default_run("bmo-fefferman");
    let cs = claims(&o, "bmo-fefferman");
    let fixtures = cs.iter().filter(|c| c.description.starts_with("fixture")).count();
    let margin = o.records.iter().find(|r| r.name == "fefferman_min_margin").map(|r| r.value).unwrap_or(f64::NAN);
    Verdict {
        pass: all(&cs) && fixtures == 20,
        detail: format!("3 examples + {fixtures} fixtures, smallest 3σ margin {margin:.4}{}", failing(&cs)),
    }
}

fn indicator_potential() -> Verdict {
    let (o, _) = default_run("indicator-potential");
    let bound = claims(&o, "indicator-potential-bound");
    let rate = claims(&o, "indicator-potential-rate");
    Verdict {
        pass: all(&bound) && all(&rate),
        detail: format!(
            "{}/{} intervals below 8β₂²√((T−c)(c−a)); slope {:.4} (target 0.5 ± 0.1){}",
            bound.iter().filter(|c| c.pass).count(),
            bound.len(),
            rate[0].measured,
            failing(&rate)
        ),
    }
}

fn bsde_suite() -> Verdict {
    let (closed, _) = default_run("bsde-closed-form");
    let (cir, secs) = default_run("bsde-variation-cir");
    let cf = claims(&closed, "bsde-closed-form");
    let var = claims(&cir, "bsde-variation-rate");
    let slopes: Vec<String> = var.iter().map(|c| format!("{:.3} (≥ {:.3})", c.measured, c.expected_exponent_or_value - c.tolerance)).collect();
    Verdict {
        pass: all(&cf) && all(&var),
        detail: format!("closed forms {}/{}; CIR Y and Z exponents {}; {secs:.0}s{}", cf.iter().filter(|c| c.pass).count(), cf.len(), slopes.join(", "), failing(&cf)),
    }
}

fn determinism() -> Verdict {
    let mut differing = Vec::new();
    let mut sizes = BTreeMap::new();
    for e in wcouple::experiments::REGISTRY {
        let mut c = ExperimentConfig::new(e.name, SEED);
        if e.fields.contains(&wcouple::config::Field::NPaths) {
            c.n_paths = Some(500);
        }
        let csv: Vec<String> = [1, 2]
            .iter()
            .map(|t| {
                let o = run_with_threads(&c, Some(*t)).unwrap_or_else(|err| panic!("{}: {err}", e.name));
                output::results_csv(e.name, &o, false).unwrap()
            })
            .collect();
        sizes.insert(e.name, csv[0].lines().count() - 1);
        if csv[0] != csv[1] {
            differing.push(e.name);
        }
    }
    Verdict {
        pass: differing.is_empty(),
        detail: format!(
            "{} experiments at 500 paths, 1 vs 2 threads, {} CSV rows compared; differing: {:?}",
            sizes.len(),
            sizes.values().sum::<usize>(),
            differing
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("chaos multiplier identity", chaos_identity),
        ("multiplier lemma bounds", multiplier_lemma),
        ("Lipschitz cut-off rate", lipschitz_rate),
        ("Hölder rate and lower bound", holder_rate),
        ("small-interval universal bound", small_interval),
        ("counterexample blow-up", counterexample),
        ("Besov and interpolation machinery", besov_interpolation),
        ("BMO and Fefferman inequality", bmo_fefferman),
        ("indicator-potential estimate", indicator_potential),
        ("BSDE suite", bsde_suite),
        ("determinism across thread counts", determinism),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.is_some_and(|n| n != i + 1) {
            continue;
        }
        let t = Instant::now();
        let v = check();
        failed += usize::from(!v.pass);
        println!(
            "criterion {:>2} {} {name}: {} [{:.0}s]",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {failed} criteria failing");
    if failed > 0 {
        std::process::exit(1);
    }
}
