use serde::{Deserialize, Serialize};

use super::lp::LpEstimate;
use crate::error::{invalid, Result};

/// Which Besov-type functional to estimate and on which grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BesovSpec {
    /// `sup_{a<c} ‖ξ − ξ^{(a,c]}‖_{L_p} / (c−a)^{1/α}` over `intervals`.
    PhiAlpha { alpha: f64, intervals: Vec<(f64, f64)> },
    /// `‖K_η(r) F(r)‖_{L_q([0,1],μ)}` on the isonormal profile sampled at `r_grid`.
    Interpolation { eta: f64, q: f64, r_grid: Vec<f64> },
}

impl BesovSpec {
    pub fn phi_alpha(alpha: f64, intervals: Vec<(f64, f64)>) -> Result<Self> {
        let spec = Self::PhiAlpha { alpha, intervals };
        spec.validate()?;
        Ok(spec)
    }

    /// `Φ_α` on [`default_intervals`].
    pub fn phi_alpha_default(alpha: f64, t0: f64, t_end: f64) -> Result<Self> {
        Self::phi_alpha(alpha, default_intervals(t0, t_end))
    }

    pub fn interpolation(eta: f64, q: f64, r_grid: Vec<f64>) -> Result<Self> {
        let spec = Self::Interpolation { eta, q, r_grid };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::PhiAlpha { alpha, intervals } => {
                if !(*alpha >= 2.0) {
                    return Err(invalid(format!("Φ_α needs α >= 2, got {alpha}")));
                }
                if intervals.is_empty() {
                    return Err(invalid("empty interval grid"));
                }
                if let Some((a, c)) = intervals.iter().find(|(a, c)| !(*a >= 0.0 && a < c)) {
                    return Err(invalid(format!("interval ({a}, {c}] is empty")));
                }
            }
            Self::Interpolation { eta, q, r_grid } => {
                if !(*eta > 0.0 && *eta < 1.0) {
                    return Err(invalid(format!("η = {eta} outside (0,1)")));
                }
                if !(*q >= 1.0) {
                    return Err(invalid(format!("q = {q} must be at least 1")));
                }
                if r_grid.is_empty() || r_grid.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
                    return Err(invalid("r grid must be a nonempty subset of (0,1)"));
                }
            }
        }
        Ok(())
    }
}

/// Anchors `a ∈ {t0, t0 + (T−t0)/4, (t0+T)/2}` times lengths `2^{−3..−9}(T−t0)`.
pub fn default_intervals(t0: f64, t_end: f64) -> Vec<(f64, f64)> {
    let len = t_end - t0;
    let mut out = Vec::new();
    for a in [t0, t0 + len / 4.0, t0 + len / 2.0] {
        for k in 3..=9 {
            out.push((a, a + len * 0.5f64.powi(k)));
        }
    }
    out
}

/// One interval of a `Φ_α` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalRatio {
    pub a: f64,
    pub c: f64,
    pub distance: LpEstimate,
    /// `distance / (c−a)^{1/α}`.
    pub ratio: f64,
    pub ratio_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovEstimate {
    /// Largest ratio over the grid, a lower estimate of the supremum.
    pub estimate: LpEstimate,
    pub argmax: (f64, f64),
    pub ratios: Vec<IntervalRatio>,
}

/// `|ξ|_{Φ_α,p}` from a sampler returning `‖ξ − ξ^{(a,c]}‖_{L_p}` per interval.
/// The standard error is the one of the maximizing interval.
pub fn besov_phi_alpha(spec: &BesovSpec, mut sampler: impl FnMut(f64, f64) -> Result<LpEstimate>) -> Result<BesovEstimate> {
    spec.validate()?;
    let BesovSpec::PhiAlpha { alpha, intervals } = spec else {
        return Err(invalid("besov_phi_alpha needs a PhiAlpha spec"));
    };
    let mut ratios = Vec::with_capacity(intervals.len());
    for &(a, c) in intervals {
        let distance = sampler(a, c)?;
        let scale = (c - a).powf(-1.0 / alpha);
        ratios.push(IntervalRatio { a, c, distance, ratio: distance.value * scale, ratio_se: distance.std_error * scale });
    }
    let best = ratios
        .iter()
        .copied()
        .reduce(|m, r| if r.ratio > m.ratio { r } else { m })
        .expect("nonempty interval grid");
    Ok(BesovEstimate {
        estimate: LpEstimate { value: best.ratio, std_error: best.ratio_se, ..best.distance },
        argmax: (best.a, best.c),
        ratios,
    })
}
