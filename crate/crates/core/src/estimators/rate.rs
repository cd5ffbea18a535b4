use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub h: f64,
    pub e: f64,
    pub std_error: f64,
}

/// Weighted least-squares fit of `log e = intercept + slope · log h`.
///
/// Weights are `(e/se)²`, the inverse variances of `log e`; if any point has
/// zero standard error the fit is unweighted. The slope variance is scaled by
/// the reduced chi-square (not below 1 for weighted fits) and the interval uses
/// Student's t with `n − 2` degrees of freedom. If the coarsest point has a
/// standardized residual above 2 and at least four points remain, it is dropped
/// once and recorded in `dropped`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub slope_se: f64,
    pub slope_ci: (f64, f64),
    pub intercept: f64,
    pub dropped: Vec<RatePoint>,
}

impl RateFit {
    /// `|slope − target| ≤ tol`.
    pub fn slope_within(&self, target: f64, tol: f64) -> bool {
        (self.slope - target).abs() <= tol
    }
}

struct Fit {
    slope: f64,
    intercept: f64,
    slope_se: f64,
    residuals: Vec<f64>,
    scale: Vec<f64>,
}

fn fit(points: &[RatePoint]) -> Fit {
    let x: Vec<f64> = points.iter().map(|p| p.h.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.e.ln()).collect();
    let weighted = points.iter().all(|p| p.std_error > 0.0);
    let w: Vec<f64> =
        points.iter().map(|p| if weighted { (p.e / p.std_error).powi(2) } else { 1.0 }).collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = w.iter().zip(x.iter().zip(&y)).map(|(w, (x, y))| w * (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(&y).map(|(x, y)| y - intercept - slope * x).collect();
    let dof = (points.len() - 2) as f64;
    let chi2 = w.iter().zip(&residuals).map(|(w, r)| w * r * r).sum::<f64>() / dof;
    let factor = if weighted { chi2.max(1.0) } else { chi2 };
    // Residual scale per point: its own standard error, or the residual spread for unweighted fits.
    let scale = w.iter().map(|w| if weighted { (1.0 / w).sqrt() } else { (chi2 / w).sqrt() }).collect();
    Fit { slope, intercept, slope_se: (factor / sxx).sqrt(), residuals, scale }
}

pub fn rate_fit(points: &[RatePoint]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(invalid(format!("rate fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.e > 0.0 && p.e.is_finite())) {
        return Err(invalid(format!("rate fit needs positive estimates, got {} at h = {}", p.e, p.h)));
    }
    if points.iter().any(|p| !(p.h > 0.0)) || points.windows(2).any(|w| !(w[0].h > w[1].h)) {
        return Err(invalid("rate fit scales must be positive and strictly decreasing"));
    }
    let mut used = points.to_vec();
    let mut dropped = Vec::new();
    let mut f = fit(&used);
    if used.len() >= 4 && f.scale[0] > 0.0 && (f.residuals[0] / f.scale[0]).abs() > 2.0 {
        dropped.push(used.remove(0));
        f = fit(&used);
    }
    let dof = (used.len() - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, dof).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::INFINITY);
    Ok(RateFit {
        points: used,
        slope: f.slope,
        slope_se: f.slope_se,
        slope_ci: (f.slope - t * f.slope_se, f.slope + t * f.slope_se),
        intercept: f.intercept,
        dropped,
    })
}

/// Shorthand for points without standard errors.
pub fn rate_fit_pairs(pairs: &[(f64, f64)]) -> Result<RateFit> {
    rate_fit(&pairs.iter().map(|&(h, e)| RatePoint { h, e, std_error: 0.0 }).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let f = rate_fit_pairs(&[(1.0, 1.0), (0.5, 0.5), (0.25, 0.25)]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-14);
        let pts: Vec<(f64, f64)> = (0..4).map(|k| 0.5f64.powi(k)).map(|h| (h, h.sqrt())).collect();
        let f = rate_fit_pairs(&pts).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-14);
        assert!(f.dropped.is_empty());
    }

    #[test]
    fn rejects_bad_points() {
        assert!(rate_fit_pairs(&[(1.0, 1.0), (0.5, 0.5)]).is_err());
        assert!(rate_fit_pairs(&[(1.0, 1.0), (0.5, 0.0), (0.25, 0.2)]).is_err());
        assert!(rate_fit_pairs(&[(0.5, 1.0), (1.0, 0.5), (0.25, 0.2)]).is_err());
    }

    #[test]
    fn outlying_coarsest_point_is_dropped() {
        let mut pts: Vec<RatePoint> = (0..6)
            .map(|k| {
                let h = 0.5f64.powi(k);
                RatePoint { h, e: h.sqrt() * (1.0 + 0.001 * (k as f64 - 2.5)), std_error: 0.01 * h.sqrt() }
            })
            .collect();
        pts[0].e *= 1.5;
        let f = rate_fit(&pts).unwrap();
        assert_eq!(f.dropped.len(), 1);
        assert!((f.slope - 0.5).abs() < 0.01);
    }
}
