//! Monte Carlo norms, Besov-type functionals, `BMO(S₂)` and rate fits.

mod besov;
mod bmo;
mod gr;
mod interpolation;
mod lp;
mod rate;

pub use besov::{besov_phi_alpha, default_intervals, BesovEstimate, BesovSpec, IntervalRatio};
pub use bmo::{bmo_s2_norm, fefferman_check, Conditioner, FeffermanReport};
pub use gr::{gr_inequality_check, GrCase, GrParams, GrReport};
pub use interpolation::{
    default_r_grid, equivalence_brackets, interpolation_functional, interpolation_functional_sampled, kernel_k,
    mu_density, tanh_sinh, EquivalenceReport,
};
pub use lp::{lp_sup_distance, LpEstimate};
pub use rate::{rate_fit, rate_fit_pairs, RateFit, RatePoint};
