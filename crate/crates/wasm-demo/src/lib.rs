//! Browser demo: three small experiments exported to JavaScript.
//!
//! Each export returns a flat `Float64Array`; the layout is documented on
//! the function.

use wasm_bindgen::prelude::*;
use wiener_coupling::chaos::{coupled_second_moment_exact, coupled_second_moment_mc, ChaosVariable};
use wiener_coupling::estimators::{rate_fit, LpEstimate, RatePoint};
use wiener_coupling::sde::{coupled_solve, coupled_sweep, InitialCondition, Preset, Scenario};
use wiener_coupling::wiener::{make_grid, sample_bundle, CouplingFunction};

fn msg(e: wiener_coupling::Error) -> String {
    e.to_string()
}

/// `[mc, std_error, exact]` for `E|ξ − ξ^r|²` with `ξ = He_order(W_1)`.
pub fn chaos_moment(order: u32, r: f64, n_paths: usize, seed: u64) -> Result<Vec<f64>, String> {
    if !(1..=6).contains(&order) {
        return Err(format!("order must be between 1 and 6, got {order}"));
    }
    let xi = ChaosVariable::hermite_of_window(order, 0.0, 1.0).map_err(msg)?;
    let grid = make_grid(0.0, 1.0, 1).map_err(msg)?;
    let bundle = sample_bundle(&grid, 1, n_paths, seed).map_err(msg)?;
    let mc = coupled_second_moment_mc(&xi, &bundle, r).map_err(msg)?;
    let exact = coupled_second_moment_exact(&xi.spectrum(), r).map_err(msg)?;
    Ok(vec![mc.mean, mc.std_error, exact])
}

/// One path of `X` and of `X^(a,c]` on `[0, 1]`: `2(n_steps + 1)` values,
/// `X` first.
pub fn cutoff_path(preset: &str, a: f64, c: f64, n_steps: usize, seed: u64) -> Result<Vec<f64>, String> {
    let model = Preset::from_pairs(preset, &[]).map_err(msg)?;
    let grid = make_grid(0.0, 1.0, n_steps).map_err(msg)?;
    let bundle = sample_bundle(&grid, 1, 1, seed).map_err(msg)?;
    let phi = CouplingFunction::indicator(a, c).map_err(msg)?;
    let (x, xp) = coupled_solve(&model, &InitialCondition::scalar(1.0), &bundle, &phi).map_err(msg)?;
    Ok(x.path(0).iter().chain(xp.path(0)).copied().collect())
}

/// `‖sup|X − X^(0,h]|‖₂` for `h = 2^{-2} … 2^{-7}` on a 256-step grid:
/// the six lengths, the six estimates, then the fitted slope and its standard error.
pub fn cutoff_rate(preset: &str, n_paths: usize, seed: u64) -> Result<Vec<f64>, String> {
    let model = Preset::from_pairs(preset, &[]).map_err(msg)?;
    let grid = make_grid(0.0, 1.0, 256).map_err(msg)?;
    let bundle = sample_bundle(&grid, 1, n_paths, seed).map_err(msg)?;
    let hs: Vec<f64> = (2..=7).map(|k| 0.5f64.powi(k)).collect();
    let scenarios: Vec<Scenario> = hs.iter().map(|h| Scenario::cut_off(0.0, *h)).collect::<Result<_, _>>().map_err(msg)?;
    let res = coupled_sweep(&model, &InitialCondition::scalar(1.0), &bundle, &scenarios).map_err(msg)?;
    let mut points = Vec::new();
    for (h, sc) in hs.iter().zip(&res.scenarios) {
        let e = LpEstimate::from_samples(&sc.sup, 2.0).map_err(msg)?;
        points.push(RatePoint { h: *h, e: e.value, std_error: e.std_error });
    }
    let fit = rate_fit(&points).map_err(msg)?;
    let mut out = hs;
    out.extend(points.iter().map(|p| p.e));
    out.extend([fit.slope, fit.slope_se]);
    Ok(out)
}

#[wasm_bindgen(js_name = chaosMoment)]
pub fn chaos_moment_js(order: u32, r: f64, n_paths: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    chaos_moment(order, r, n_paths, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = cutoffPath)]
pub fn cutoff_path_js(preset: &str, a: f64, c: f64, n_steps: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    cutoff_path(preset, a, c, n_steps, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = cutoffRate)]
pub fn cutoff_rate_js(preset: &str, n_paths: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    cutoff_rate(preset, n_paths, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chaos_moment_of_second_order_at_one_half() {
        let v = chaos_moment(2, 0.5, 20_000, 1).unwrap();
        assert!((v[2] - 1.0).abs() < 1e-12);
        assert!((v[0] - v[2]).abs() < 4.0 * v[1]);
        assert!(chaos_moment(0, 0.5, 10, 1).is_err());
    }

    #[test]
    fn cutoff_path_agrees_before_the_window() {
        let v = cutoff_path("linear", 0.5, 0.75, 64, 3).unwrap();
        assert_eq!(v.len(), 130);
        let (x, xp) = v.split_at(65);
        assert_eq!(x[..=32], xp[..=32]);
        assert_ne!(x[64], xp[64]);
        assert!(cutoff_path("linear", 0.3, 0.75, 64, 3).is_err());
    }

    #[test]
    fn cutoff_rate_is_near_one_half_for_the_linear_preset() {
        let v = cutoff_rate("linear", 4000, 5).unwrap();
        assert_eq!(v.len(), 14);
        assert!((v[12] - 0.5).abs() < 0.1, "{v:?}");
    }
}
