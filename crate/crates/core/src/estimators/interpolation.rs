//! The real-interpolation functional `‖K_η(r) F(r)‖_{L_q([0,1],μ)}` with
//!
//! ```text
//! dμ(r) = r / (√(1−r²)(1−√(1−r²))) dr,    K_η(r) = (1−√(1−r²))^{−η/2}.
//! ```
//!
//! Integrals use the substitution `r = sin v`, under which
//! `dμ = sin v / (1−cos v) dv` and `1 − cos v = 2 sin²(v/2)`, so the
//! `1/√(1−r)` singularity at `r = 1` disappears. The remaining singularity at
//! `v = 0` (of order `v^{q(1−η)−1}` when `F(r) ~ r`) is handled by tanh-sinh
//! quadrature, which is insensitive to integrable endpoint singularities.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `K_η(r)`.
pub fn kernel_k(eta: f64, r: f64) -> f64 {
    one_minus_sqrt(r).powf(-eta / 2.0)
}

/// Density of `μ` with respect to `dr` on `(0,1)`.
pub fn mu_density(r: f64) -> f64 {
    r / ((1.0 - r * r).sqrt() * one_minus_sqrt(r))
}

/// `1 − √(1−r²)` without cancellation.
fn one_minus_sqrt(r: f64) -> f64 {
    r * r / (1.0 + (1.0 - r * r).max(0.0).sqrt())
}

/// Pointwise equivalence ratios on a grid: `K_η(r) r^η` and
/// `(dμ/dr) · r √(1−r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub k_min: f64,
    pub k_max: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    /// Bracket `[1, 2^{η/2}]` for `K_η(r) r^η`.
    pub k_bracket: (f64, f64),
    /// Bracket `[1/√2, 2]` for the `μ` density ratio.
    pub mu_bracket: (f64, f64),
    pub ok: bool,
}

/// Since `1 − √(1−r²) = r²/(1+√(1−r²))`, one has `K_η(r) r^η = (1+√(1−r²))^{η/2}`
/// and `(dμ/dr) r√(1−r) = (1+√(1−r²))/√(1+r)`, which give the brackets.
pub fn equivalence_brackets(eta: f64, r_grid: &[f64]) -> Result<EquivalenceReport> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid(format!("η = {eta} outside (0,1)")));
    }
    let mut rep = EquivalenceReport {
        k_min: f64::INFINITY,
        k_max: 0.0,
        mu_min: f64::INFINITY,
        mu_max: 0.0,
        k_bracket: (1.0, 2f64.powf(eta / 2.0)),
        mu_bracket: (std::f64::consts::FRAC_1_SQRT_2, 2.0),
        ok: true,
    };
    for &r in r_grid {
        if !(r > 0.0 && r < 1.0) {
            return Err(invalid(format!("grid point {r} outside (0,1)")));
        }
        let k = kernel_k(eta, r) * r.powf(eta);
        let m = mu_density(r) * r * (1.0 - r).sqrt();
        rep.k_min = rep.k_min.min(k);
        rep.k_max = rep.k_max.max(k);
        rep.mu_min = rep.mu_min.min(m);
        rep.mu_max = rep.mu_max.max(m);
    }
    let tol = 1e-12;
    rep.ok = rep.k_min >= rep.k_bracket.0 * (1.0 - tol)
        && rep.k_max <= rep.k_bracket.1 * (1.0 + tol)
        && rep.mu_min >= rep.mu_bracket.0 * (1.0 - tol)
        && rep.mu_max <= rep.mu_bracket.1 * (1.0 + tol);
    Ok(rep)
}

/// `K_η(sin v)^q` times `dμ/dv`, assembled in the `v` variable.
fn weight_v(eta: f64, q: f64, v: f64) -> f64 {
    let one_minus_cos = 2.0 * (0.5 * v).sin().powi(2);
    one_minus_cos.powf(-eta * q / 2.0) * v.sin() / one_minus_cos
}

/// Tanh-sinh quadrature of `f` over `(0, b)`; `f` receives the abscissa and is
/// never evaluated at the endpoints. Refines until two levels agree to `rel_tol`.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, b: f64, rel_tol: f64) -> f64 {
    let half = b / 2.0;
    let t_max = 4.0;
    // Points closer than this to 0 carry negligible mass for integrable
    // singularities of the form v^{s−1}, s ≥ 0.05.
    let floor = 1e-100 * b;
    let term = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let e = (2.0 * u.abs()).exp();
        // Distance from the nearer endpoint, computed without cancellation.
        let dist = b / (e + 1.0);
        let x = if t < 0.0 { dist } else { b - dist };
        let w = half * FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        if dist < floor || !w.is_finite() || w == 0.0 {
            0.0
        } else {
            w * f(x)
        }
    };
    let mut h = 0.5;
    let mut sum = term(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += term(k as f64 * h) + term(-(k as f64) * h);
        k += 1;
    }
    let mut estimate = sum * h;
    for _ in 0..10 {
        h /= 2.0;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += term(k as f64 * h) + term(-(k as f64) * h);
            k += 2;
        }
        let next = sum * h;
        let done = (next - estimate).abs() <= rel_tol * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// `Φ^{(K_η,μ,q)}(F)` for an analytic profile `F: (0,1] → [0,∞)`.
/// For `q = ∞` this is `sup_r K_η(r) F(r)` from a dense grid refined by golden-section search.
pub fn interpolation_functional(f: impl Fn(f64) -> f64, eta: f64, q: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid(format!("η = {eta} outside (0,1)")));
    }
    if !(q >= 1.0) {
        return Err(invalid(format!("q = {q} must be at least 1")));
    }
    if q.is_infinite() {
        let g = |v: f64| {
            let r = v.sin();
            (2.0 * (0.5 * v).sin().powi(2)).powf(-eta / 2.0) * f(r).abs()
        };
        let n = 4096;
        let nodes: Vec<f64> = (1..=n).map(|i| FRAC_PI_2 * i as f64 / n as f64).collect();
        let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
        for (i, v) in nodes.iter().enumerate() {
            let val = g(*v);
            if val > best {
                best = val;
                best_i = i;
            }
        }
        let lo = if best_i == 0 { 1e-12 } else { nodes[best_i - 1] };
        let hi = nodes[(best_i + 1).min(n - 1)];
        let (mut a, mut b) = (lo, hi);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..100 {
            let (x1, x2) = (b - phi * (b - a), a + phi * (b - a));
            if g(x1) >= g(x2) {
                b = x2;
            } else {
                a = x1;
            }
        }
        return Ok(best.max(g(0.5 * (a + b))));
    }
    let integrand = |v: f64| weight_v(eta, q, v) * f(v.sin()).abs().powf(q);
    Ok(tanh_sinh(integrand, FRAC_PI_2, 1e-13).powf(1.0 / q))
}

/// `Φ^{(K_η,μ,q)}` of a sampled profile `F(r_i) ± se_i` with `0 < r_1 < … < r_m ≤ 1`.
///
/// The integrand is linearly interpolated in `v = arcsin r` and integrated by
/// the trapezoidal rule; on `(0, v_1)` the profile is taken proportional to
/// `r`, whose contribution is integrated exactly from the local power law.
/// Standard errors are propagated assuming fully correlated errors (common
/// random numbers make the profile points positively correlated).
pub fn interpolation_functional_sampled(r: &[f64], f: &[f64], se: &[f64], eta: f64, q: f64) -> Result<(f64, f64)> {
    if r.len() != f.len() || r.len() != se.len() || r.len() < 2 {
        return Err(invalid("sampled profile needs matching r, F, se vectors with at least 2 points"));
    }
    if r.windows(2).any(|w| !(w[0] < w[1])) || !(r[0] > 0.0) || r[r.len() - 1] > 1.0 {
        return Err(invalid("profile grid must be strictly increasing in (0,1]"));
    }
    if !(eta > 0.0 && eta < 1.0) || !(q >= 1.0) {
        return Err(invalid(format!("need η ∈ (0,1) and q ≥ 1, got η = {eta}, q = {q}")));
    }
    if q.is_infinite() {
        let (mut best, mut best_se) = (0.0, 0.0);
        for i in 0..r.len() {
            let k = kernel_k(eta, r[i]);
            if k * f[i] > best {
                best = k * f[i];
                best_se = k * se[i];
            }
        }
        return Ok((best, best_se));
    }
    let v: Vec<f64> = r.iter().map(|x| x.asin()).collect();
    let w: Vec<f64> = v.iter().map(|v| weight_v(eta, q, *v)).collect();
    // Integral = Σ c_i F_i^q with trapezoid coefficients c_i.
    let mut c = vec![0.0; r.len()];
    for i in 0..r.len() - 1 {
        let dv = v[i + 1] - v[i];
        c[i] += 0.5 * dv * w[i];
        c[i + 1] += 0.5 * dv * w[i + 1];
    }
    // Near 0: w(v) F^q ≈ const · v^{q(1−η)−1}, so ∫_0^{v_1} = w_1 F_1^q v_1 / (q(1−η)).
    c[0] += w[0] * v[0] / (q * (1.0 - eta));
    let integral: f64 = c.iter().zip(f).map(|(c, f)| c * f.abs().powf(q)).sum();
    let d_integral: f64 = c.iter().zip(f.iter().zip(se)).map(|(c, (f, s))| c * q * f.abs().powf(q - 1.0) * s).sum();
    let value = integral.powf(1.0 / q);
    let value_se = if integral > 0.0 { d_integral * value / (q * integral) } else { 0.0 };
    Ok((value, value_se))
}

/// Sine-spaced grid in `(0,1]`, dense near both ends: `r_i = sin(v_i)` with
/// `v_i` geometric near 0 and uniform afterwards.
pub fn default_r_grid(n: usize) -> Vec<f64> {
    let n = n.max(4);
    let geo = n / 2;
    let mut v: Vec<f64> = (0..geo).map(|i| FRAC_PI_2 * 1e-4f64.powf(1.0 - i as f64 / geo as f64) * 0.05).collect();
    let start = FRAC_PI_2 * 0.05;
    let rest = n - geo;
    v.extend((0..rest).map(|i| start + (FRAC_PI_2 - start) * (i + 1) as f64 / rest as f64));
    v.into_iter().map(|v| v.sin().min(1.0)).collect()
}
