use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Extra per-step inputs for path-dependent and random coefficients.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Aux {
    /// `sup_{t≤u≤s} X_u` of state component 0.
    pub running_max: f64,
    /// `∫_t^s X_u du` of state component 0 (left-point rule).
    pub running_integral: f64,
    /// Values of the model's potential processes at `s` (see [`SdeModel::potentials`]).
    pub potential: [f64; 2],
}

/// `U_s = 𝟙{W^{(j)}_s > level} · 𝟙{s > anchor}` on the driving Brownian motion.
///
/// Under a coupling the potential is re-evaluated on the coupled driver, which
/// is how the random coefficients are transformed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorPotential {
    pub level: f64,
    pub anchor: f64,
    pub component: usize,
}

impl IndicatorPotential {
    /// Value at the left node `s` of a step, with `w` the driver level `W_s`.
    /// The time indicator is taken as its right limit at `s`.
    #[inline]
    pub fn eval(&self, s: f64, w: f64) -> f64 {
        if s >= self.anchor && w > self.level {
            1.0
        } else {
            0.0
        }
    }
}

/// Regularity data. `None` means the constant does not exist (e.g. `L_σ` of a
/// Hölder diffusion).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub l_b: Option<f64>,
    pub l_sigma: Option<f64>,
    pub k_b: f64,
    pub k_sigma: f64,
    /// Hölder exponent of `σ` in space; 1 for Lipschitz models.
    pub theta: f64,
}

/// Drift and diffusion of `dX = b(s,X,aux) ds + σ(s,X,aux) dW`.
///
/// `s` is always the left node of an Euler step. Coefficients with jumps in
/// time return their right limit at `s`, so the step `(s_k, s_{k+1}]` sees the
/// value on its interior.
pub trait SdeModel: Send + Sync {
    fn dim_state(&self) -> usize;
    fn dim_noise(&self) -> usize;
    fn drift(&self, s: f64, x: &[f64], aux: &Aux, out: &mut [f64]);
    /// Row-major `d × N` matrix.
    fn diffusion(&self, s: f64, x: &[f64], aux: &Aux, out: &mut [f64]);
    fn meta(&self) -> &ModelMeta;
    fn potentials(&self) -> &[IndicatorPotential] {
        &[]
    }
}

type CoefFn = Arc<dyn Fn(f64, &[f64], &Aux, &mut [f64]) + Send + Sync>;

/// A model assembled from closures.
#[derive(Clone)]
pub struct FnModel {
    d: usize,
    n: usize,
    drift: CoefFn,
    diffusion: CoefFn,
    meta: ModelMeta,
    potentials: Vec<IndicatorPotential>,
}

impl FnModel {
    pub fn new(
        d: usize,
        n: usize,
        drift: impl Fn(f64, &[f64], &Aux, &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(f64, &[f64], &Aux, &mut [f64]) + Send + Sync + 'static,
        meta: ModelMeta,
    ) -> Self {
        Self { d, n, drift: Arc::new(drift), diffusion: Arc::new(diffusion), meta, potentials: Vec::new() }
    }

    pub fn with_potentials(mut self, potentials: Vec<IndicatorPotential>) -> Self {
        self.potentials = potentials;
        self
    }

    /// `dX = b dt + σ dW` with constant scalars.
    pub fn constant(b: f64, sigma: f64) -> Self {
        let meta = ModelMeta {
            name: "constant".into(),
            params: [("b".to_string(), b), ("sigma".to_string(), sigma)].into_iter().collect(),
            l_b: Some(0.0),
            l_sigma: Some(0.0),
            k_b: b.abs(),
            k_sigma: sigma.abs(),
            theta: 1.0,
        };
        Self::new(1, 1, move |_, _, _, o| o[0] = b, move |_, _, _, o| o[0] = sigma, meta)
    }
}

impl std::fmt::Debug for FnModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnModel").field("d", &self.d).field("n", &self.n).field("meta", &self.meta).finish()
    }
}

impl SdeModel for FnModel {
    fn dim_state(&self) -> usize {
        self.d
    }
    fn dim_noise(&self) -> usize {
        self.n
    }
    fn drift(&self, s: f64, x: &[f64], aux: &Aux, out: &mut [f64]) {
        (self.drift)(s, x, aux, out)
    }
    fn diffusion(&self, s: f64, x: &[f64], aux: &Aux, out: &mut [f64]) {
        (self.diffusion)(s, x, aux, out)
    }
    fn meta(&self) -> &ModelMeta {
        &self.meta
    }
    fn potentials(&self) -> &[IndicatorPotential] {
        &self.potentials
    }
}
