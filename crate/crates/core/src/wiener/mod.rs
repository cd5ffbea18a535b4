//! Time grids, coupling functions and the coupled Brownian driver triple `(W, W', W^φ)`.

pub mod bundle;
pub mod coupling;
pub mod grid;

pub use bundle::{couple, sample_bundle, BrownianBundle, BrownianCopy, IncrementSource, Increments};
pub use coupling::{coupling_l2_mass, CouplingFunction, CouplingWeights};
pub use grid::{make_grid, TimeGrid};
