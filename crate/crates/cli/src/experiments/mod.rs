//! The experiment registry. Each experiment reads its knobs from an
//! [`ExperimentConfig`] through [`Ctx`], falling back to its own defaults.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use wiener_coupling::estimators::{rate_fit, LpEstimate, RatePoint};
use wiener_coupling::wiener::{make_grid, CouplingFunction, TimeGrid};

use crate::config::{ExperimentConfig, Field, Sweep};
use crate::outcome::Outcome;
use crate::CliError;

mod analytic;
mod backward;
mod chaos;
pub mod forward;

pub type Runner = fn(&Ctx) -> Result<Outcome, CliError>;

pub struct ExperimentInfo {
    pub name: &'static str,
    pub summary: &'static str,
    /// Optional config fields the experiment reads.
    pub fields: &'static [Field],
    pub run: Runner,
}

use Field::*;

pub const REGISTRY: &[ExperimentInfo] = &[
    ExperimentInfo {
        name: "chaos-identity",
        summary: "E|ξ−ξ^r|² for ξ ∈ {W_1, W_1²−1, He_3(W_1)} against the chaos multiplier formula (sweep: constant couplings)",
        fields: &[NPaths, Sweep],
        run: chaos::chaos_identity,
    },
    ExperimentInfo {
        name: "d12-profile",
        summary: "multiplier lemma on random chaos spectra and the r ↦ ‖ξ−ξ^r‖₂/r profile of W_1²−1 (params: spectra, max_order, r_points)",
        fields: &[NPaths, Params],
        run: chaos::d12_profile,
    },
    ExperimentInfo {
        name: "lipschitz-rate",
        summary: "rate of ‖sup|X−X^(a,c]|‖_p in c−a for a Lipschitz preset (params: preset parameters and xi; sweep anchor = a)",
        fields: &[Preset, Params, Grid, NPaths, Sweep, P],
        run: forward::lipschitz_rate,
    },
    ExperimentInfo {
        name: "holder-rate",
        summary: "two-regime Hölder model σ = 1 on [0,c], |x|^θ after: rate of ‖X_T−X_T^(a,c]‖_p and the explicit lower bound (params: theta; sweep anchor = a)",
        fields: &[Params, Grid, NPaths, Sweep, P],
        run: forward::holder_rate,
    },
    ExperimentInfo {
        name: "holder-lower-bound",
        summary: "the explicit lower bound c_p (c−a)^{1/(2p)} alone, same model and knobs as holder-rate",
        fields: &[Params, Grid, NPaths, Sweep, P],
        run: forward::holder_lower_bound,
    },
    ExperimentInfo {
        name: "small-interval",
        summary: "‖sup_[a,c]|X−X^(a,c]|‖_p / (√(c−a)(1+‖ξ‖_p)) stays within a 20% band over dyadic c−a (preset overrides the default trio)",
        fields: &[Preset, Params, Grid, NPaths, Sweep, P],
        run: forward::small_interval,
    },
    ExperimentInfo {
        name: "counterexample-blowup",
        summary: "Ciesielski-type diffusion: best ‖X_1−X_1^(a,c]‖₂/√(c−a) over half-length windows inside each level interval (params: theta, levels)",
        fields: &[Params, Grid, NPaths],
        run: forward::counterexample_blowup,
    },
    ExperimentInfo {
        name: "besov-phi-alpha",
        summary: "Φ₂ seminorm of W_T (exactly √2) and of X_T for the linear preset over the default interval family",
        fields: &[Grid, NPaths],
        run: forward::besov_phi_alpha,
    },
    ExperimentInfo {
        name: "interpolation-functional",
        summary: "interpolation functional against an independent adaptive quadrature, K_η and μ equivalence brackets, sampled profile of W_1",
        fields: &[NPaths],
        run: analytic::interpolation_functional,
    },
    ExperimentInfo {
        name: "bmo-fefferman",
        summary: "BMO(S₂) norm examples and the Fefferman-type inequality on randomized (A, C) fixtures (params: fixtures)",
        fields: &[Params, Grid, NPaths],
        run: analytic::bmo_fefferman,
    },
    ExperimentInfo {
        name: "gr-lemma",
        summary: "both integral inequalities of the Garsia–Rodemich-type lemma on random piecewise-linear functions (params: cases)",
        fields: &[Params],
        run: analytic::gr_lemma,
    },
    ExperimentInfo {
        name: "indicator-potential",
        summary: "‖∫_c^T|U^(a,c]−U|ds‖₂ for U = 𝟙{W>K}𝟙_(a,T] against 8β₂²√((T−c)(c−a)) and its rate (params: level; sweep anchor = c)",
        fields: &[Params, Grid, NPaths, Sweep],
        run: forward::indicator_potential,
    },
    ExperimentInfo {
        name: "bsde-closed-form",
        summary: "LSMC solutions with known answers: g(x) = x on X = W (Z ≡ 1) and the linear driver f = −y",
        fields: &[Grid, NPaths],
        run: backward::bsde_closed_form,
    },
    ExperimentInfo {
        name: "bsde-variation-cir",
        summary: "rate of ‖sup_[a,c]|Y−Y_a|‖_p and ‖(∫_a^c Z²)^{1/2}‖_p for a CIR forward process, g(x) = x, f = 0 (sweep anchor = a)",
        fields: &[Params, Grid, NPaths, Sweep, P],
        run: backward::bsde_variation_cir,
    },
    ExperimentInfo {
        name: "bsde-coupling",
        summary: "Y/Z coupling distances against the forward coupling distance (linear preset, g(x) = x) and the Brownian reduction (sweep anchor = a)",
        fields: &[Params, Grid, NPaths, Sweep, P],
        run: backward::bsde_coupling,
    },
];

pub fn find(name: &str) -> Result<&'static ExperimentInfo, CliError> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| {
        let known: Vec<&str> = REGISTRY.iter().map(|e| e.name).collect();
        CliError::Config(format!("unknown experiment '{name}' (known: {})", known.join(", ")))
    })
}

/// Validate `config` against the registry and run it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let info = find(&config.experiment)?;
    if let Some(f) = config.fields_present().into_iter().find(|f| !info.fields.contains(f)) {
        return Err(CliError::Config(format!("experiment '{}' does not use the field '{}'", info.name, f.name())));
    }
    (info.run)(&Ctx { config })
}

/// Config accessors with experiment defaults.
pub struct Ctx<'a> {
    pub config: &'a ExperimentConfig,
}

impl Ctx<'_> {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn n_paths(&self, default: usize) -> Result<usize, CliError> {
        match self.config.n_paths.unwrap_or(default) {
            0 => Err(CliError::Config("n_paths must be positive".into())),
            n => Ok(n),
        }
    }

    pub fn grid(&self, t_end: f64, n_steps: usize) -> Result<TimeGrid, CliError> {
        let g = self.config.grid.unwrap_or(crate::config::GridSpec { t0: 0.0, t_end, n_steps });
        Ok(make_grid(g.t0, g.t_end, g.n_steps)?)
    }

    pub fn p_list(&self, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let p = self.config.p.clone().unwrap_or_else(|| default.to_vec());
        if p.is_empty() || p.iter().any(|p| !(*p >= 1.0)) {
            return Err(CliError::Config(format!("p values must be at least 1, got {p:?}")));
        }
        Ok(p)
    }

    /// Experiment parameter from `params`, removed from the map handed to presets.
    pub fn param(&self, key: &str, default: f64) -> f64 {
        self.config.params.get(key).copied().unwrap_or(default)
    }

    /// Integer-valued parameter.
    pub fn count(&self, key: &str, default: usize) -> Result<usize, CliError> {
        let v = self.param(key, default as f64);
        if v < 0.0 || v.fract() != 0.0 || v > 1e9 {
            return Err(CliError::Config(format!("parameter '{key}' must be a nonnegative integer, got {v}")));
        }
        Ok(v as usize)
    }

    /// `params` without the given experiment-level keys.
    pub fn preset_params(&self, reserved: &[&str]) -> BTreeMap<String, f64> {
        self.config.params.iter().filter(|(k, _)| !reserved.contains(&k.as_str())).map(|(k, v)| (k.clone(), *v)).collect()
    }

    /// Reject `params` keys outside `allowed`.
    pub fn only_params(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.config.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!(
                "experiment '{}' has no parameter '{k}' (known: {})",
                self.config.experiment,
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    /// Intervals `(left, right)` of the sweep; `anchor_is_left` says which end
    /// a dyadic sweep's anchor fixes. Explicit coupling lists must be cut-offs.
    pub fn intervals(&self, anchor: f64, k_min: u32, k_max: u32, anchor_is_left: bool) -> Result<Vec<(f64, f64)>, CliError> {
        let sweep = self.config.sweep.clone().unwrap_or(Sweep::Dyadic { anchor, k_min, k_max });
        let out: Vec<(f64, f64)> = match sweep {
            Sweep::Dyadic { anchor, k_min, k_max } => {
                if k_min > k_max || k_max > 40 {
                    return Err(CliError::Config(format!("dyadic sweep needs k_min <= k_max <= 40, got {k_min}..{k_max}")));
                }
                (k_min..=k_max)
                    .map(|k| {
                        let len = 0.5f64.powi(k as i32);
                        if anchor_is_left {
                            (anchor, anchor + len)
                        } else {
                            (anchor - len, anchor)
                        }
                    })
                    .collect()
            }
            Sweep::Couplings { phi } => phi
                .iter()
                .map(|f| match f {
                    CouplingFunction::Indicator { a, c } => Ok((*a, *c)),
                    other => Err(CliError::Config(format!("this experiment sweeps cut-off couplings only, got {other:?}"))),
                })
                .collect::<Result<_, _>>()?,
        };
        if out.is_empty() {
            return Err(CliError::Config("empty interval sweep".into()));
        }
        Ok(out)
    }

    /// Seeded generator for randomized fixtures, independent of the Brownian streams.
    pub fn fixture_rng(&self, salt: u64) -> Fixtures {
        Fixtures(ChaCha8Rng::seed_from_u64(self.config.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
    }
}

pub struct Fixtures(ChaCha8Rng);

impl Fixtures {
    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
        lo + (hi - lo) * u
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform(0.0, 1.0) * n as f64) as usize).min(n - 1)
    }
}

/// Rate fit of `(h, estimate)` pairs.
pub fn fit_points(points: &[(f64, LpEstimate)]) -> Result<wiener_coupling::estimators::RateFit, CliError> {
    let pts: Vec<RatePoint> = points.iter().map(|(h, e)| RatePoint { h: *h, e: e.value, std_error: e.std_error }).collect();
    Ok(rate_fit(&pts)?)
}

/// Half-width of the slope confidence interval.
pub fn ci_half(fit: &wiener_coupling::estimators::RateFit) -> f64 {
    0.5 * (fit.slope_ci.1 - fit.slope_ci.0)
}
