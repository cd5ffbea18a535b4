//! Named scalar models with flat numeric parameter maps.
//!
//! | preset | drift | diffusion | parameters (defaults) |
//! |---|---|---|---|
//! | `linear` | `μx` | `σ₀x` | `mu` (0.1), `sigma` (0.2) |
//! | `cir` | `A − Bx` | `σ√|x|` | `a` (1), `b` (1), `sigma` (0.5) |
//! | `holder_power` | `κ + μx` | `1` for `s < switch`, then `σ₀|x|^θ` | `theta` (0.5), `sigma` (1), `kappa` (0), `mu` (0), `switch` (0) |
//! | `ciesielski` | `0` | `1 + Σ_ℓ 𝟙_{I_ℓ}(s) S^θ_{n_ℓ}(x)` | `theta` (0.5), `levels` (3) |
//! | `controlled_indicator` | `μx + κU` | `σ₀x + νV` | `mu` (0.1), `kappa` (0.5), `sigma` (0.2), `nu` (0.2), `level_u` (0), `anchor_u` (0), `level_v` (0), `anchor_v` (0) |
//!
//! `U` and `V` are [`IndicatorPotential`]s of the driving Brownian motion.
//! With `switch = c > 0`, `holder_power` is the two-regime model
//! `σ_c(s,x) = 1` on `[0,c]`, `|x|^θ` afterwards (with `σ₀ = 1`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{Aux, IndicatorPotential, ModelMeta, SdeModel};
use crate::error::{invalid, Result};

pub const PRESET_NAMES: [&str; 5] = ["linear", "cir", "holder_power", "ciesielski", "controlled_indicator"];

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Linear { mu: f64, sigma: f64 },
    Cir { a: f64, b: f64, sigma: f64 },
    HolderPower { theta: f64, sigma: f64, kappa: f64, mu: f64, switch: f64 },
    Ciesielski(CounterexampleSpec),
    ControlledIndicator { mu: f64, kappa: f64, sigma: f64, nu: f64 },
}

/// A registered model; see the module table.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    kind: Kind,
    meta: ModelMeta,
    potentials: Vec<IndicatorPotential>,
}

fn take(params: &BTreeMap<String, f64>, defaults: &[(&str, f64)], preset: &str) -> Result<BTreeMap<String, f64>> {
    if let Some(k) = params.keys().find(|k| !defaults.iter().any(|(d, _)| d == k)) {
        let known: Vec<&str> = defaults.iter().map(|(d, _)| *d).collect();
        return Err(invalid(format!("unknown parameter '{k}' for preset '{preset}' (known: {})", known.join(", "))));
    }
    let mut out = BTreeMap::new();
    for (k, d) in defaults {
        let v = params.get(*k).copied().unwrap_or(*d);
        if !v.is_finite() {
            return Err(invalid(format!("parameter '{k}' of preset '{preset}' must be finite")));
        }
        out.insert(k.to_string(), v);
    }
    Ok(out)
}

impl Preset {
    pub fn build(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let meta = |p: BTreeMap<String, f64>, l_b, l_sigma, k_b, k_sigma, theta| ModelMeta {
            name: name.to_string(),
            params: p,
            l_b,
            l_sigma,
            k_b,
            k_sigma,
            theta,
        };
        match name {
            "linear" => {
                let p = take(params, &[("mu", 0.1), ("sigma", 0.2)], name)?;
                let (mu, sigma) = (p["mu"], p["sigma"]);
                Ok(Self {
                    kind: Kind::Linear { mu, sigma },
                    meta: meta(p, Some(mu.abs()), Some(sigma.abs()), mu.abs(), sigma.abs(), 1.0),
                    potentials: Vec::new(),
                })
            }
            "cir" => {
                let p = take(params, &[("a", 1.0), ("b", 1.0), ("sigma", 0.5)], name)?;
                let (a, b, sigma) = (p["a"], p["b"], p["sigma"]);
                Ok(Self {
                    kind: Kind::Cir { a, b, sigma },
                    meta: meta(p, Some(b.abs()), None, a.abs().max(b.abs()), sigma.abs(), 0.5),
                    potentials: Vec::new(),
                })
            }
            "holder_power" => {
                let p = take(
                    params,
                    &[("theta", 0.5), ("sigma", 1.0), ("kappa", 0.0), ("mu", 0.0), ("switch", 0.0)],
                    name,
                )?;
                let theta = p["theta"];
                if !(0.5..=1.0).contains(&theta) {
                    return Err(invalid(format!("holder_power needs theta in [1/2, 1], got {theta}")));
                }
                if p["switch"] < 0.0 {
                    return Err(invalid("holder_power switch time must be >= 0"));
                }
                let (sigma, kappa, mu, switch) = (p["sigma"], p["kappa"], p["mu"], p["switch"]);
                let l_sigma = if theta == 1.0 { Some(sigma.abs()) } else { None };
                Ok(Self {
                    kind: Kind::HolderPower { theta, sigma, kappa, mu, switch },
                    meta: meta(p, Some(mu.abs()), l_sigma, kappa.abs().max(mu.abs()), sigma.abs().max(1.0), theta),
                    potentials: Vec::new(),
                })
            }
            "ciesielski" => {
                let p = take(params, &[("theta", 0.5), ("levels", 3.0)], name)?;
                let levels = p["levels"];
                if levels < 1.0 || levels.fract() != 0.0 || levels > 20.0 {
                    return Err(invalid(format!("ciesielski levels must be an integer in [1, 20], got {levels}")));
                }
                let spec = CounterexampleSpec::with_defaults(p["theta"], levels as usize)?;
                let theta = spec.theta;
                Ok(Self {
                    kind: Kind::Ciesielski(spec),
                    meta: meta(p, Some(0.0), None, 0.0, 2.0, theta),
                    potentials: Vec::new(),
                })
            }
            "controlled_indicator" => {
                let p = take(
                    params,
                    &[
                        ("mu", 0.1),
                        ("kappa", 0.5),
                        ("sigma", 0.2),
                        ("nu", 0.2),
                        ("level_u", 0.0),
                        ("anchor_u", 0.0),
                        ("level_v", 0.0),
                        ("anchor_v", 0.0),
                    ],
                    name,
                )?;
                let (mu, kappa, sigma, nu) = (p["mu"], p["kappa"], p["sigma"], p["nu"]);
                let potentials = vec![
                    IndicatorPotential { level: p["level_u"], anchor: p["anchor_u"], component: 0 },
                    IndicatorPotential { level: p["level_v"], anchor: p["anchor_v"], component: 0 },
                ];
                Ok(Self {
                    kind: Kind::ControlledIndicator { mu, kappa, sigma, nu },
                    meta: meta(
                        p,
                        Some(mu.abs()),
                        Some(sigma.abs()),
                        mu.abs().max(kappa.abs()),
                        sigma.abs().max(nu.abs()),
                        1.0,
                    ),
                    potentials,
                })
            }
            other => Err(invalid(format!("unknown preset '{other}' (known: {})", PRESET_NAMES.join(", ")))),
        }
    }

    pub fn from_pairs(name: &str, pairs: &[(&str, f64)]) -> Result<Self> {
        Self::build(name, &pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    pub fn counterexample(&self) -> Option<&CounterexampleSpec> {
        match &self.kind {
            Kind::Ciesielski(spec) => Some(spec),
            _ => None,
        }
    }
}

impl SdeModel for Preset {
    fn dim_state(&self) -> usize {
        1
    }

    fn dim_noise(&self) -> usize {
        1
    }

    #[inline]
    fn drift(&self, _s: f64, x: &[f64], aux: &Aux, out: &mut [f64]) {
        out[0] = match &self.kind {
            Kind::Linear { mu, .. } => mu * x[0],
            Kind::Cir { a, b, .. } => a - b * x[0],
            Kind::HolderPower { kappa, mu, .. } => kappa + mu * x[0],
            Kind::Ciesielski(_) => 0.0,
            Kind::ControlledIndicator { mu, kappa, .. } => mu * x[0] + kappa * aux.potential[0],
        }
    }

    #[inline]
    fn diffusion(&self, s: f64, x: &[f64], aux: &Aux, out: &mut [f64]) {
        out[0] = match &self.kind {
            Kind::Linear { sigma, .. } => sigma * x[0],
            Kind::Cir { sigma, .. } => sigma * x[0].abs().sqrt(),
            Kind::HolderPower { theta, sigma, switch, .. } => {
                if s < *switch {
                    1.0
                } else if *theta == 0.5 {
                    sigma * x[0].abs().sqrt()
                } else {
                    sigma * x[0].abs().powf(*theta)
                }
            }
            Kind::Ciesielski(spec) => spec.sigma_right(s, x[0]),
            Kind::ControlledIndicator { sigma, nu, .. } => sigma * x[0] + nu * aux.potential[1],
        }
    }

    fn meta(&self) -> &ModelMeta {
        &self.meta
    }

    fn potentials(&self) -> &[IndicatorPotential] {
        &self.potentials
    }
}

/// Bounded θ-Hölder diffusion built from sawtooth primitives on the intervals
/// `I_ℓ = (t_{ℓ−1}, t_ℓ]` accumulating at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    pub theta: f64,
    /// `t_0 = 0 < t_1 < … < t_L < 1`.
    pub breakpoints: Vec<f64>,
    /// `n_1 < n_2 < … < n_L`.
    pub frequencies: Vec<u32>,
}

impl CounterexampleSpec {
    pub fn new(theta: f64, breakpoints: Vec<f64>, frequencies: Vec<u32>) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(invalid(format!("counterexample needs theta in (0,1), got {theta}")));
        }
        if breakpoints.len() != frequencies.len() + 1 || frequencies.is_empty() {
            return Err(invalid("counterexample needs one frequency per interval"));
        }
        if breakpoints[0] != 0.0 || breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.last() >= Some(&1.0) {
            return Err(invalid("counterexample breakpoints must satisfy 0 = t_0 < t_1 < ... < 1"));
        }
        if frequencies.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("counterexample frequencies must be strictly increasing"));
        }
        Ok(Self { theta, breakpoints, frequencies })
    }

    /// `t_ℓ = 1 − 2^{−ℓ}` and `n_ℓ` the smallest admissible frequency (above
    /// `n_{ℓ−1}`) with `2^{2(n_ℓ+1)(1−θ)} |I_ℓ|² / 8 ≥ ℓ`.
    pub fn with_defaults(theta: f64, levels: usize) -> Result<Self> {
        let breakpoints: Vec<f64> = (0..=levels).map(|l| 1.0 - 0.5f64.powi(l as i32)).collect();
        let mut frequencies = Vec::with_capacity(levels);
        let mut n = 0u32;
        for l in 1..=levels {
            let len = breakpoints[l] - breakpoints[l - 1];
            while blowup_index(theta, n, len) < l as f64 {
                n += 1;
            }
            frequencies.push(n);
            n += 1;
        }
        Self::new(theta, breakpoints, frequencies)
    }

    pub fn levels(&self) -> usize {
        self.frequencies.len()
    }

    /// `I_ℓ` for `ℓ = 1..=L`.
    pub fn interval(&self, level: usize) -> (f64, f64) {
        (self.breakpoints[level - 1], self.breakpoints[level])
    }

    /// `2^{2(n_ℓ+1)(1−θ)} |I_ℓ|² / 8`.
    pub fn blowup_index(&self, level: usize) -> f64 {
        let (lo, hi) = self.interval(level);
        blowup_index(self.theta, self.frequencies[level - 1], hi - lo)
    }

    /// `σ^θ(s,x)` with `I_ℓ` left-open, right-closed and `σ^θ = 1` past `t_L`.
    pub fn sigma(&self, s: f64, x: f64) -> f64 {
        match (1..=self.levels()).find(|&l| {
            let (lo, hi) = self.interval(l);
            lo < s && s <= hi
        }) {
            Some(l) => 1.0 + sawtooth_primitive(self.theta, self.frequencies[l - 1], x),
            None => 1.0,
        }
    }

    /// Right limit of `σ^θ(·,x)` at `s`.
    #[inline]
    pub fn sigma_right(&self, s: f64, x: f64) -> f64 {
        let l = self.breakpoints.partition_point(|t| *t <= s);
        if l == 0 || l > self.levels() {
            1.0
        } else {
            1.0 + sawtooth_primitive(self.theta, self.frequencies[l - 1], x)
        }
    }
}

fn blowup_index(theta: f64, n: u32, len: f64) -> f64 {
    2f64.powf(2.0 * (n as f64 + 1.0) * (1.0 - theta)) * len * len / 8.0
}

/// `S_n^θ(x) = 2^{−(n+1)(θ−1)} ∫_0^{|x|} r_n(y) dy` where `r_n` alternates
/// `+1, −1` on consecutive intervals of length `2^{−(n+1)}`. The integral is
/// the triangle wave `min(m mod 2^{−n}, 2^{−n} − m mod 2^{−n})`.
pub fn sawtooth_primitive(theta: f64, n: u32, x: f64) -> f64 {
    let period = 0.5f64.powi(n as i32);
    let m = x.abs() % period;
    2f64.powf((n as f64 + 1.0) * (1.0 - theta)) * m.min(period - m)
}

/// Pointwise `σ^θ(s,x)`.
pub fn counterexample_sigma(spec: &CounterexampleSpec, s: f64, x: f64) -> f64 {
    spec.sigma(s, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sawtooth_values() {
        // r_0 = +1 on (0, 1/2], −1 on (1/2, 1].
        let s2 = std::f64::consts::SQRT_2;
        assert_eq!(sawtooth_primitive(0.5, 0, 0.0), 0.0);
        assert!((sawtooth_primitive(0.5, 0, 0.25) - s2 * 0.25).abs() < 1e-15);
        assert!((sawtooth_primitive(0.5, 0, 0.5) - s2 * 0.5).abs() < 1e-15);
        assert!(sawtooth_primitive(0.5, 0, 1.0).abs() < 1e-15);
        assert!((sawtooth_primitive(0.5, 0, -0.25) - s2 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn default_frequencies() {
        let spec = CounterexampleSpec::with_defaults(0.5, 3).unwrap();
        assert_eq!(spec.frequencies, vec![4, 7, 10]);
        assert_eq!(spec.breakpoints, vec![0.0, 0.5, 0.75, 0.875]);
        for l in 1..=3 {
            assert!(spec.blowup_index(l) >= l as f64);
        }
    }

    #[test]
    fn sigma_switches_on_intervals() {
        let spec = CounterexampleSpec::with_defaults(0.5, 2).unwrap();
        let x = 2f64.powi(-5);
        assert_eq!(spec.sigma(0.0, x), 1.0);
        assert!((spec.sigma(0.5, x) - (1.0 + 2f64.powf(-2.5))).abs() < 1e-15);
        assert!(spec.sigma(0.5, 2f64.powi(-8)) < spec.sigma(0.5, x));
        assert_eq!(spec.sigma_right(0.5, x), spec.sigma(0.6, x));
        assert_eq!(spec.sigma(0.9, x), 1.0);
        assert_eq!(spec.sigma(1.0, x), 1.0);
    }

    #[test]
    fn unknown_presets_and_parameters_are_rejected() {
        assert!(Preset::from_pairs("nope", &[]).is_err());
        assert!(Preset::from_pairs("linear", &[("drift", 1.0)]).is_err());
        assert!(Preset::from_pairs("holder_power", &[("theta", 0.3)]).is_err());
        for name in PRESET_NAMES {
            assert!(Preset::from_pairs(name, &[]).is_ok(), "{name}");
        }
    }

    #[test]
    fn two_regime_holder_diffusion() {
        let m = Preset::from_pairs("holder_power", &[("switch", 0.25)]).unwrap();
        let mut out = [0.0];
        m.diffusion(0.2, &[4.0], &Aux::default(), &mut out);
        assert_eq!(out[0], 1.0);
        m.diffusion(0.25, &[4.0], &Aux::default(), &mut out);
        assert_eq!(out[0], 2.0);
        m.diffusion(0.5, &[-4.0], &Aux::default(), &mut out);
        assert_eq!(out[0], 2.0);
    }
}
