//! Finite Wiener-chaos random variables.
//!
//! A [`ChaosVariable`] is `E ξ + Σ coefficient · Π_j He_{d_j}(g_j)` where
//! `g_j = ∫ h_j dW^{(component j)}` and the `h_j = 𝟙_(a_j,c_j] / √(c_j − a_j)`
//! are orthonormal step kernels (disjoint windows per component). Each term is
//! a multiple Wiener integral of order `Σ d_j` with `E|term|² = coefficient² Π d_j!`,
//! so all second moments of `ξ` and of its isonormal coupling `ξ^r` are exact:
//! coupling with `φ ≡ r` multiplies chaos order `n` by `(1−r²)^{n/2}` in
//! covariance, which gives
//!
//! ```text
//! E|ξ − ξ^r|² = 2 Σ_n [1 − (1−r²)^{n/2}] E|I_n(f_n)|².
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::LpEstimate;
use crate::par;
use crate::stats::{batch_mean, MeanEstimate};
use crate::wiener::{BrownianBundle, BrownianCopy, CouplingFunction, CouplingWeights};

/// Default highest chaos order for generated variables.
pub const DEFAULT_MAX_ORDER: usize = 6;

/// Normalized indicator kernel `𝟙_(a,c] / √(c−a)` on one Brownian component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepKernel {
    pub a: f64,
    pub c: f64,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosTerm {
    pub coefficient: f64,
    /// `(kernel index, Hermite degree ≥ 1)`, sorted by kernel index.
    pub degrees: Vec<(usize, u32)>,
}

impl ChaosTerm {
    pub fn order(&self) -> usize {
        self.degrees.iter().map(|(_, d)| *d as usize).sum()
    }

    /// `E|term|² = coefficient² · Π d!`.
    pub fn second_moment(&self) -> f64 {
        let norm: f64 = self.degrees.iter().map(|(_, d)| factorial(*d)).product();
        self.coefficient * self.coefficient * norm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosVariable {
    dim: usize,
    kernels: Vec<StepKernel>,
    constant: f64,
    terms: Vec<ChaosTerm>,
}

impl ChaosVariable {
    /// A constant with the given kernel family; add terms with [`Self::with_term`].
    pub fn new(dim: usize, kernels: Vec<StepKernel>, constant: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("chaos variable needs dim >= 1"));
        }
        for k in &kernels {
            if !(k.a >= 0.0 && k.a < k.c && k.c.is_finite()) {
                return Err(invalid(format!("kernel window ({}, {}] is empty or invalid", k.a, k.c)));
            }
            if k.component >= dim {
                return Err(invalid(format!("kernel component {} >= dim {dim}", k.component)));
            }
        }
        for (i, x) in kernels.iter().enumerate() {
            for y in &kernels[i + 1..] {
                if x.component == y.component && x.a < y.c && y.a < x.c {
                    return Err(invalid(format!(
                        "kernels ({}, {}] and ({}, {}] overlap on component {}; the family must be orthonormal",
                        x.a, x.c, y.a, y.c, x.component
                    )));
                }
            }
        }
        Ok(Self { dim, kernels, constant, terms: Vec::new() })
    }

    /// Add `coefficient · Π He_d(g_k)`; repeated multi-indices are merged.
    pub fn with_term(mut self, coefficient: f64, degrees: &[(usize, u32)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(k, d) in degrees {
            if k >= self.kernels.len() {
                return Err(invalid(format!("term references kernel {k}, only {} defined", self.kernels.len())));
            }
            if d > 0 {
                *map.entry(k).or_insert(0u32) += d;
            }
        }
        let degrees: Vec<(usize, u32)> = map.into_iter().collect();
        if degrees.is_empty() {
            self.constant += coefficient;
            return Ok(self);
        }
        match self.terms.iter_mut().find(|t| t.degrees == degrees) {
            Some(t) => t.coefficient += coefficient,
            None => self.terms.push(ChaosTerm { coefficient, degrees }),
        }
        Ok(self)
    }

    /// `W_T` on `[0,T]`: coefficient `√T` times the first Hermite polynomial.
    pub fn brownian_terminal(t_end: f64) -> Result<Self> {
        Self::hermite_of_window(1, 0.0, t_end)?.scaled(t_end.sqrt())
    }

    /// `He_n((W_c − W_a)/√(c−a))`, a pure order-`n` variable with variance `n!`.
    pub fn hermite_of_window(n: u32, a: f64, c: f64) -> Result<Self> {
        Self::new(1, vec![StepKernel { a, c, component: 0 }], 0.0)?.with_term(1.0, &[(0, n)])
    }

    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        self.constant *= factor;
        for t in &mut self.terms {
            t.coefficient *= factor;
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kernels(&self) -> &[StepKernel] {
        &self.kernels
    }

    pub fn terms(&self) -> &[ChaosTerm] {
        &self.terms
    }

    pub fn mean(&self) -> f64 {
        self.constant
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(ChaosTerm::order).max().unwrap_or(0)
    }

    pub fn spectrum(&self) -> ChaosSpectrum {
        let mut a = vec![0.0; self.max_order() + 1];
        for t in &self.terms {
            a[t.order()] += t.second_moment();
        }
        ChaosSpectrum { a }
    }

    /// Value of `ξ` given the Gaussian coordinates `g_j`.
    pub fn value_at(&self, g: &[f64]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|t| t.coefficient * t.degrees.iter().map(|&(k, d)| hermite(d, g[k])).product::<f64>())
                .sum::<f64>()
    }

    fn kernel_steps(&self, bundle: &BrownianBundle) -> Result<Vec<(usize, usize)>> {
        let grid = bundle.grid();
        if bundle.dim() != self.dim {
            return Err(Error::Mismatch(format!("bundle dim {} != chaos dim {}", bundle.dim(), self.dim)));
        }
        self.kernels
            .iter()
            .map(|k| match (grid.node_index(k.a), grid.node_index(k.c)) {
                (Some(i), Some(j)) => Ok((i, j)),
                _ => Err(Error::Misaligned(format!(
                    "kernel window ({}, {}] is not aligned with the bundle grid",
                    k.a, k.c
                ))),
            })
            .collect()
    }
}

/// Samples of `ξ^φ`, one per bundle path. `φ ≡ 0` gives samples of `ξ`.
pub fn evaluate(xi: &ChaosVariable, bundle: &BrownianBundle, phi: &CouplingFunction) -> Result<Vec<f64>> {
    let weights = phi.weights(bundle.grid())?;
    evaluate_weights(xi, bundle, &weights)
}

fn evaluate_weights(xi: &ChaosVariable, bundle: &BrownianBundle, weights: &CouplingWeights) -> Result<Vec<f64>> {
    let steps = xi.kernel_steps(bundle)?;
    let source = bundle.generator();
    let dim = bundle.dim();
    let row = bundle.row_len();
    let needs_wp = !weights.is_identity();
    let h = bundle.grid().step();
    Ok(par::map_paths(
        bundle.n_paths(),
        || (vec![0.0; row], vec![0.0; row], vec![0.0; row], vec![0.0; xi.kernels.len()]),
        |(dw, dwp, coupled, g), i| {
            source.fill(i, BrownianCopy::W, 0, dw);
            let drive: &[f64] = if needs_wp {
                source.fill(i, BrownianCopy::WPrime, 0, dwp);
                weights.couple_into(dim, dw, dwp, coupled);
                coupled
            } else {
                dw
            };
            for (gj, (k, &(s0, s1))) in g.iter_mut().zip(xi.kernels.iter().zip(&steps)) {
                let sum: f64 = (s0..s1).map(|s| drive[s * dim + k.component]).sum();
                *gj = sum / (h * (s1 - s0) as f64).sqrt();
            }
            xi.value_at(g)
        },
    ))
}

/// Monte Carlo estimate of `E|ξ − ξ^r|²` under common random numbers.
pub fn coupled_second_moment_mc(xi: &ChaosVariable, bundle: &BrownianBundle, r: f64) -> Result<MeanEstimate> {
    let base = evaluate(xi, bundle, &CouplingFunction::identity())?;
    let coupled = evaluate(xi, bundle, &CouplingFunction::constant(r)?)?;
    let sq: Vec<f64> = base.iter().zip(&coupled).map(|(x, y)| (x - y).powi(2)).collect();
    Ok(batch_mean(&sq))
}

/// `a_n = E|I_n(f_n)|²` for `n = 0..=max`; `a_0` is ignored by the multiplier formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosSpectrum {
    pub a: Vec<f64>,
}

impl ChaosSpectrum {
    /// Spectrum with `a_n = values[n-1]` for `n ≥ 1`.
    pub fn from_orders(values: &[f64]) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(invalid(format!("spectrum entries must be finite and nonnegative, got {v}")));
        }
        let mut a = vec![0.0];
        a.extend_from_slice(values);
        Ok(Self { a })
    }

    /// Single order `n` with mass `value`.
    pub fn single(n: usize, value: f64) -> Result<Self> {
        let mut v = vec![0.0; n.max(1)];
        v[n - 1] = value;
        Self::from_orders(&v)
    }

    pub fn variance(&self) -> f64 {
        self.a.iter().skip(1).sum()
    }

    /// `Σ n a_n`.
    pub fn weighted_mass(&self) -> f64 {
        self.a.iter().enumerate().map(|(n, v)| n as f64 * v).sum()
    }

    fn orders(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.a.iter().enumerate().skip(1).map(|(n, v)| (n as f64, *v))
    }
}

/// Exact `E|ξ − ξ^r|² = 2 Σ [1 − (1−r²)^{n/2}] a_n`.
pub fn coupled_second_moment_exact(spectrum: &ChaosSpectrum, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid(format!("isonormal parameter r = {r} outside [0,1]")));
    }
    let keep = 1.0 - r * r;
    Ok(2.0 * spectrum.orders().map(|(n, a)| (1.0 - keep.powf(n / 2.0)) * a).sum::<f64>())
}

/// `‖Dξ‖_{L₂(Ω×[0,T])} = (Σ n a_n)^{1/2}`.
pub fn malliavin_norm_exact(spectrum: &ChaosSpectrum) -> f64 {
    spectrum.weighted_mass().sqrt()
}

/// Outcome of [`lemma_multiplier_bounds`]; margins are `rhs − lhs` minima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    /// `Σ[1−|1−r|^{n/2}] a_n ≤ c₂ r` on the grid with `c₂ = Σ n a_n`.
    pub c1_ok: bool,
    /// `Σ n a_n ≤ 2 c₁` with `c₁ = sup_r Σ[1−|1−r|^{n/2}] a_n / r`.
    pub c2_ok: bool,
    /// Per-order bounds `1−|1−r|^{n/2} ≤ n r/2` (`n ≥ 2`) and `1−√(1−r) ≤ r`.
    pub per_order_ok: bool,
    pub min_margin_c1: f64,
    pub min_margin_c2: f64,
    pub min_margin_per_order: f64,
}

/// Both directions of the equivalence `sup_r Σ[1−|1−r|^{n/2}]a_n / r < ∞ ⇔ Σ n a_n < ∞`
/// with the explicit constants `c₁ = c₂` and `c₂ = 2c₁`.
pub fn lemma_multiplier_bounds(spectrum: &ChaosSpectrum, r_grid: &[f64]) -> MultiplierReport {
    const TOL: f64 = -1e-12;
    let c2 = spectrum.weighted_mass();
    let lhs = |r: f64| spectrum.orders().map(|(n, a)| (1.0 - (1.0 - r).abs().powf(n / 2.0)) * a).sum::<f64>();

    let mut min_c1 = f64::INFINITY;
    let mut min_order = f64::INFINITY;
    // The supremum defining c₁ includes the limit r ↓ 0, which equals Σ n a_n / 2.
    let mut c1 = c2 / 2.0;
    for &r in r_grid {
        let l = lhs(r);
        min_c1 = min_c1.min(c2 * r - l);
        if r > 0.0 {
            c1 = c1.max(l / r);
        }
        for (n, _) in spectrum.orders() {
            let m = 1.0 - (1.0 - r).abs().powf(n / 2.0);
            let bound = if n == 1.0 { r } else { n * r / 2.0 };
            min_order = min_order.min(bound - m);
        }
    }
    let min_c2 = 2.0 * c1 - c2;
    MultiplierReport {
        c1_ok: min_c1 >= TOL * c2.max(1.0),
        c2_ok: min_c2 >= TOL * c2.max(1.0),
        per_order_ok: min_order >= TOL,
        min_margin_c1: min_c1,
        min_margin_c2: min_c2,
        min_margin_per_order: min_order,
    }
}

/// Monte Carlo and exact profiles of `r ↦ ‖ξ − ξ^r‖_{L₂} / r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D12Profile {
    pub r: Vec<f64>,
    pub mc: Vec<LpEstimate>,
    pub exact: Vec<f64>,
    pub malliavin_norm: f64,
    /// Every MC ratio within 3 standard errors of the exact one.
    pub agrees: bool,
    /// `½‖Dξ‖ ≤ sup` over the grid (exact profile).
    pub lower_bracket_ok: bool,
    /// `sup ≤ √2 ‖Dξ‖` over the grid (exact profile).
    pub upper_bracket_ok: bool,
}

impl D12Profile {
    pub fn sup_exact(&self) -> f64 {
        self.exact.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_mc(&self) -> f64 {
        self.mc.iter().map(|e| e.value).fold(0.0, f64::max)
    }
}

pub fn d12_ratio_profile(xi: &ChaosVariable, bundle: &BrownianBundle, r_grid: &[f64]) -> Result<D12Profile> {
    if let Some(r) = r_grid.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
        return Err(invalid(format!("profile grid value r = {r} outside (0,1]")));
    }
    let spectrum = xi.spectrum();
    let base = evaluate(xi, bundle, &CouplingFunction::identity())?;
    let mut mc = Vec::with_capacity(r_grid.len());
    let mut exact = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let coupled = evaluate(xi, bundle, &CouplingFunction::constant(r)?)?;
        let diff: Vec<f64> = base.iter().zip(&coupled).map(|(x, y)| (x - y) / r).collect();
        mc.push(LpEstimate::from_samples(&diff, 2.0)?);
        exact.push(coupled_second_moment_exact(&spectrum, r)?.sqrt() / r);
    }
    let norm = malliavin_norm_exact(&spectrum);
    let agrees = mc.iter().zip(&exact).all(|(m, e)| (m.value - e).abs() <= 3.0 * m.std_error + 1e-12);
    let sup = exact.iter().copied().fold(0.0, f64::max);
    Ok(D12Profile {
        r: r_grid.to_vec(),
        mc,
        exact,
        malliavin_norm: norm,
        agrees,
        lower_bracket_ok: 0.5 * norm <= sup + 1e-12,
        upper_bracket_ok: sup <= std::f64::consts::SQRT_2 * norm + 1e-12,
    })
}

/// Probabilists' Hermite polynomial `He_n(x)`.
pub fn hermite(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for k in 1..n {
                let next = x * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_low_orders() {
        let x = 1.7;
        assert_eq!(hermite(2, x), x * x - 1.0);
        assert!((hermite(3, x) - (x.powi(3) - 3.0 * x)).abs() < 1e-12);
        assert!((hermite(4, x) - (x.powi(4) - 6.0 * x * x + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn spectrum_of_brownian_terminal_value() {
        let xi = ChaosVariable::brownian_terminal(2.0).unwrap();
        let a = xi.spectrum().a;
        assert_eq!(a.len(), 2);
        assert!((a[1] - 2.0).abs() < 1e-15);
        assert!((malliavin_norm_exact(&xi.spectrum()) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_multiplier_values() {
        let w1 = ChaosSpectrum::single(1, 1.0).unwrap();
        assert!((coupled_second_moment_exact(&w1, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let sq = ChaosSpectrum::single(2, 2.0).unwrap();
        assert!((coupled_second_moment_exact(&sq, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(coupled_second_moment_exact(&sq, 0.0).unwrap(), 0.0);
        assert!(coupled_second_moment_exact(&sq, 1.5).is_err());
        assert!(coupled_second_moment_exact(&sq, -0.1).is_err());
    }

    #[test]
    fn malliavin_norms() {
        assert!((malliavin_norm_exact(&ChaosSpectrum::single(2, 2.0).unwrap()) - 2.0).abs() < 1e-15);
        assert_eq!(malliavin_norm_exact(&ChaosSpectrum::from_orders(&[]).unwrap()), 0.0);
    }

    #[test]
    fn multiplier_lemma_equality_cases() {
        let a1 = ChaosSpectrum::single(1, 1.0).unwrap();
        let rep = lemma_multiplier_bounds(&a1, &[1.0]);
        assert!(rep.c1_ok && rep.c2_ok && rep.per_order_ok);
        assert!(rep.min_margin_c1.abs() < 1e-15);

        let a2 = ChaosSpectrum::single(2, 1.0).unwrap();
        let rep = lemma_multiplier_bounds(&a2, &[1.0]);
        // 1 − |1−1|^1 = 1 = (1/2)·2·1
        assert!(rep.min_margin_per_order.abs() < 1e-15);
        assert!(rep.c1_ok);

        let a3 = ChaosSpectrum::single(3, 1.0).unwrap();
        let rep = lemma_multiplier_bounds(&a3, &[0.5]);
        // c₂ r − Σ[1−|1−r|^{n/2}]a_n = 1.5 − (1 − 0.5^{1.5})
        assert!((rep.min_margin_c1 - (1.5 - (1.0 - 0.5f64.powf(1.5)))).abs() < 1e-12);
        // The n = 2 bound is an equality at every r.
        assert!(rep.min_margin_per_order.abs() < 1e-15);
        assert!(rep.c1_ok && rep.c2_ok);
    }

    #[test]
    fn merging_and_orthogonality_checks() {
        let k = vec![StepKernel { a: 0.0, c: 0.5, component: 0 }, StepKernel { a: 0.5, c: 1.0, component: 0 }];
        let xi = ChaosVariable::new(1, k, 1.0)
            .unwrap()
            .with_term(1.0, &[(0, 1), (1, 1)])
            .unwrap()
            .with_term(2.0, &[(1, 1), (0, 1)])
            .unwrap();
        assert_eq!(xi.terms().len(), 1);
        assert_eq!(xi.terms()[0].coefficient, 3.0);
        assert_eq!(xi.spectrum().a, vec![0.0, 0.0, 9.0]);
        assert_eq!(xi.mean(), 1.0);

        let overlapping = vec![StepKernel { a: 0.0, c: 0.6, component: 0 }, StepKernel { a: 0.5, c: 1.0, component: 0 }];
        assert!(ChaosVariable::new(1, overlapping, 0.0).is_err());
    }
}
