//! Monte Carlo toolkit for Wiener-space couplings.
//!
//! A Brownian motion `W` is mixed with an independent copy `W'` through a
//! coupling function `φ: [0,T] → [0,1]`,
//!
//! ```text
//! W^φ_s = ∫_0^s √(1−φ(u)²) dW_u + ∫_0^s φ(u) dW'_u,
//! ```
//!
//! and a functional of the driver is compared with the same functional of
//! `W^φ` under common random numbers. The crate provides
//!
//! * [`wiener`]: grids, coupling functions and reproducible increment bundles,
//! * [`chaos`]: finite Wiener-chaos variables with exact coupled moments,
//! * [`sde`]: Euler–Maruyama solvers for coupled forward SDEs and named presets,
//! * [`estimators`]: `L_p` coupling distances, Besov and interpolation
//!   functionals, `BMO(S₂)` norms and log-log rate fits,
//! * [`bsde`]: a least-squares Monte Carlo solver for Markovian BSDEs and the
//!   coupling and variation estimates of its solution.

pub mod bsde;
pub mod chaos;
pub mod error;
pub mod estimators;
pub mod par;
pub mod record;
pub mod regression;
pub mod sde;
pub mod stats;
pub mod wiener;

pub use error::{Error, Result};
