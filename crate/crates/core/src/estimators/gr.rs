use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Exponents for the two integral inequalities for `D` on `[c, s]`:
///
/// 1. `1 ≤ ρ ≤ q ≤ p`: `(∫|D|^ρ)^{p/q} ≤ (s−c)^{p/q−1} ∫(|D| + |D|^p)`,
/// 2. `1 < p < q`, `q−p+1 ≤ ρ ≤ q`, `K > 0`:
///    `(∫|D|^ρ)^{p/q} ≤ K^{−α} (D*)^p + K^β ∫(|D| + |D|^p)` with
///    `α = q/(q−p)`, `1/α + 1/β = 1` and `D* = sup|D|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrParams {
    pub p: f64,
    pub q: f64,
    pub rho: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GrCase {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrReport {
    pub case: GrCase,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    pub ok: bool,
}

impl GrParams {
    pub fn case(&self) -> Result<GrCase> {
        let GrParams { p, q, rho, k } = *self;
        if 1.0 <= rho && rho <= q && q <= p && p.is_finite() {
            Ok(GrCase::First)
        } else if 1.0 < p && p < q && q.is_finite() && q - p + 1.0 <= rho && rho <= q && k > 0.0 {
            Ok(GrCase::Second)
        } else {
            Err(invalid(format!(
                "(p, q, rho, K) = ({p}, {q}, {rho}, {k}) satisfies neither 1 <= rho <= q <= p nor 1 < p < q, q-p+1 <= rho <= q, K > 0"
            )))
        }
    }
}

/// Check the inequality that applies to `params` for samples `d` of `D` at
/// nodes `u` (`u[0] = c`, `u[m] = s`), integrating with the trapezoidal rule.
/// Both sides are integrals against the same positive discrete measure, so the
/// inequality holds exactly for it and `ok` is decided with a `1e−12` relative slack.
pub fn gr_inequality_check(u: &[f64], d: &[f64], params: GrParams) -> Result<GrReport> {
    if u.len() != d.len() || u.len() < 2 {
        return Err(invalid("need matching node and value vectors with at least two entries"));
    }
    if u.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("nodes must be strictly increasing"));
    }
    let case = params.case()?;
    let GrParams { p, q, rho, k } = params;
    let trap = |f: &dyn Fn(f64) -> f64| -> f64 {
        u.windows(2).zip(d.windows(2)).map(|(uu, dd)| 0.5 * (uu[1] - uu[0]) * (f(dd[0]) + f(dd[1]))).sum()
    };
    let lhs = trap(&|x: f64| x.abs().powf(rho)).powf(p / q);
    let mass = trap(&|x: f64| x.abs() + x.abs().powf(p));
    let rhs = match case {
        GrCase::First => (u[u.len() - 1] - u[0]).powf(p / q - 1.0) * mass,
        GrCase::Second => {
            let alpha = q / (q - p);
            let beta = alpha / (alpha - 1.0);
            let dstar = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            k.powf(-alpha) * dstar.powf(p) + k.powf(beta) * mass
        }
    };
    let margin = rhs - lhs;
    Ok(GrReport { case, lhs, rhs, margin, ok: margin >= -1e-12 * rhs.abs().max(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_function_examples() {
        let u = [0.0, 0.25, 0.5];
        let d = [1.0; 3];
        let r = gr_inequality_check(&u, &d, GrParams { p: 1.0, q: 1.0, rho: 1.0, k: 1.0 }).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-15 && (r.rhs - 1.0).abs() < 1e-15 && r.ok);
        let r = gr_inequality_check(&u, &d, GrParams { p: 1.5, q: 2.0, rho: 1.5, k: 1.0 }).unwrap();
        assert_eq!(r.case, GrCase::Second);
        assert!((r.lhs - 0.5f64.powf(0.75)).abs() < 1e-15);
        assert!((r.rhs - 2.0).abs() < 1e-15 && r.ok);
    }

    #[test]
    fn rejects_parameters_outside_both_cases() {
        assert!(GrParams { p: 1.0, q: 2.0, rho: 1.0, k: 1.0 }.case().is_err());
        assert!(GrParams { p: 2.0, q: 3.0, rho: 1.5, k: 1.0 }.case().is_err());
        assert!(GrParams { p: 2.0, q: 3.0, rho: 2.5, k: 0.0 }.case().is_err());
    }
}
