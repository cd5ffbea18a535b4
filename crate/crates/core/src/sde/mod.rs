//! Forward SDE models and Euler–Maruyama solvers.

mod model;
mod potential;
mod presets;
mod solver;

pub use model::{Aux, FnModel, IndicatorPotential, ModelMeta, SdeModel};
pub use potential::{lamperti_cir, potential_indicator};
pub use presets::{counterexample_sigma, sawtooth_primitive, CounterexampleSpec, Preset, PRESET_NAMES};
pub use solver::{
    coupled_solve, coupled_sweep, euler_solve, Driver, InitialCondition, PathEnsemble, Provenance, Scenario,
    ScenarioSamples, SweepResult,
};
