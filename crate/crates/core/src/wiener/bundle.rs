//! Reproducible Brownian increments for the pair `(W, W')`.
//!
//! Every increment is a pure function of `(seed, path, copy, step, component)`:
//! path `i` of `W` reads ChaCha8 stream `2i`, path `i` of `W'` reads stream
//! `2i + 1`, and the word position inside a stream is `2·(step·dim + component)`.
//! Normals come from the inverse normal CDF of one 53-bit uniform, so any path
//! or any sub-range of steps can be regenerated on its own, in any order, on
//! any number of threads.
//!
//! A bundle is a descriptor; increments are produced on demand per path. Use
//! [`BrownianBundle::increments`] to materialize small ensembles.

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::coupling::{CouplingFunction, CouplingWeights};
use super::grid::TimeGrid;
use crate::error::{invalid, Result};
use crate::par;

/// Largest ensemble (in stored values per copy) that [`BrownianBundle::increments`] will build.
pub const MAX_MATERIALIZED: usize = 1 << 27;

/// Which of the two independent Brownian motions to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrownianCopy {
    W,
    WPrime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrownianBundle {
    grid: TimeGrid,
    dim: usize,
    n_paths: usize,
    seed: u64,
}

impl BrownianBundle {
    pub fn new(grid: TimeGrid, dim: usize, n_paths: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("Brownian dimension must be at least 1"));
        }
        if n_paths == 0 {
            return Err(invalid("n_paths must be at least 1"));
        }
        Ok(Self { grid, dim, n_paths, seed })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Values per path and copy: `n_steps × dim`.
    pub fn row_len(&self) -> usize {
        self.grid.n_steps() * self.dim
    }

    pub fn generator(&self) -> IncrementSource {
        IncrementSource::new(self.seed, self.dim, self.grid.step().sqrt())
    }

    /// Increments of one path over all steps.
    pub fn fill_path(&self, path: usize, copy: BrownianCopy, out: &mut [f64]) {
        self.generator().fill(path, copy, 0, out);
    }

    /// Both copies, materialized as `[n_paths × n_steps × dim]` arrays.
    pub fn increments(&self) -> Result<Increments> {
        let len = self.n_paths * self.row_len();
        if self.row_len() > 0 && len / self.row_len() != self.n_paths || len > MAX_MATERIALIZED {
            return Err(invalid(format!(
                "bundle with {} values per copy is too large to materialize; stream paths instead",
                len
            )));
        }
        let source = self.generator();
        let mut w = vec![0.0; len];
        let mut wp = vec![0.0; len];
        par::fill_rows(&mut w, self.row_len(), || (), |_, i, row| source.fill(i, BrownianCopy::W, 0, row));
        par::fill_rows(&mut wp, self.row_len(), || (), |_, i, row| {
            source.fill(i, BrownianCopy::WPrime, 0, row)
        });
        Ok(Increments { grid: self.grid.clone(), dim: self.dim, n_paths: self.n_paths, w, wp })
    }
}

/// Stateless increment generator shared by all workers.
#[derive(Debug, Clone)]
pub struct IncrementSource {
    key: [u8; 32],
    dim: usize,
    scale: f64,
    normal: Normal,
}

impl IncrementSource {
    fn new(seed: u64, dim: usize, scale: f64) -> Self {
        let mut keygen = ChaCha8Rng::seed_from_u64(seed);
        let mut key = [0u8; 32];
        keygen.fill_bytes(&mut key);
        Self { key, dim, scale, normal: Normal::standard() }
    }

    fn stream(&self, path: usize, copy: BrownianCopy) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        let tag = match copy {
            BrownianCopy::W => 0,
            BrownianCopy::WPrime => 1,
        };
        rng.set_stream(2 * path as u64 + tag);
        rng
    }

    /// Standard normal from one 64-bit word, mapped to the open unit interval.
    #[inline]
    fn normal_from(&self, bits: u64) -> f64 {
        let u = ((bits >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0);
        self.normal.inverse_cdf(u)
    }

    /// Increments of steps `first_step..` for one path, `out.len() / dim` steps.
    pub fn fill(&self, path: usize, copy: BrownianCopy, first_step: usize, out: &mut [f64]) {
        let mut rng = self.stream(path, copy);
        if first_step > 0 {
            rng.set_word_pos(2 * (first_step * self.dim) as u128);
        }
        for v in out.iter_mut() {
            *v = self.scale * self.normal_from(rng.next_u64());
        }
    }
}

/// Materialized increments of `W` and `W'`, row-major `[path][step][component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    pub grid: TimeGrid,
    pub dim: usize,
    pub n_paths: usize,
    pub w: Vec<f64>,
    pub wp: Vec<f64>,
}

impl Increments {
    pub fn row_len(&self) -> usize {
        self.grid.n_steps() * self.dim
    }

    pub fn w_path(&self, i: usize) -> &[f64] {
        let l = self.row_len();
        &self.w[i * l..(i + 1) * l]
    }

    pub fn wp_path(&self, i: usize) -> &[f64] {
        let l = self.row_len();
        &self.wp[i * l..(i + 1) * l]
    }

    /// Increments of `W^φ`, same layout as `w`.
    pub fn couple(&self, phi: &CouplingFunction) -> Result<Vec<f64>> {
        let weights = phi.weights(&self.grid)?;
        Ok(self.couple_weights(&weights))
    }

    pub fn couple_weights(&self, weights: &CouplingWeights) -> Vec<f64> {
        let mut out = vec![0.0; self.w.len()];
        let l = self.row_len();
        par::fill_rows(&mut out, l, || (), |_, i, row| {
            weights.couple_into(self.dim, self.w_path(i), self.wp_path(i), row)
        });
        out
    }

    /// Node values `W_{s_k}` (component `j`) from prefix sums of a row of increments.
    pub fn levels(increments: &[f64], dim: usize, j: usize) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(increments.len() / dim + 1);
        out.push(0.0);
        for step in increments.chunks(dim) {
            acc += step[j];
            out.push(acc);
        }
        out
    }
}

/// Couple a bundle with `φ`, materializing `W^φ` increments.
pub fn couple(bundle: &BrownianBundle, phi: &CouplingFunction) -> Result<Vec<f64>> {
    bundle.increments()?.couple(phi)
}

/// Shorthand for [`BrownianBundle::new`].
pub fn sample_bundle(grid: &TimeGrid, dim: usize, n_paths: usize, seed: u64) -> Result<BrownianBundle> {
    BrownianBundle::new(grid.clone(), dim, n_paths, seed)
}
