use super::model::IndicatorPotential;
use super::solver::PathEnsemble;

/// Nodewise `U_{s_k} = 𝟙{W_{s_k} > level} 𝟙_{(a,T]}(s_k)` of a scalar driver path.
///
/// Unlike the potentials read by models (which use the right limit at a step's
/// left node), this evaluates the indicator exactly at each node. Apply it to
/// the coupled driver path to get `U^φ`.
pub fn potential_indicator(level: f64, a: f64, nodes: &[f64], path: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .zip(path)
        .map(|(s, w)| if *s > a && *w > level { 1.0 } else { 0.0 })
        .collect()
}

impl IndicatorPotential {
    /// Nodewise path of this potential; see [`potential_indicator`].
    pub fn path(&self, nodes: &[f64], driver: &[f64]) -> Vec<f64> {
        potential_indicator(self.level, self.anchor, nodes, driver)
    }
}

/// Lamperti transform `Y = √(max(X, 0))` of scalar (CIR) paths. Negative Euler
/// excursions are clamped to zero.
pub fn lamperti_cir(paths: &PathEnsemble) -> PathEnsemble {
    paths.map(|x| x.max(0.0).sqrt())
}
