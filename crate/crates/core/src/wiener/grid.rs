use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t0 = s_0 < s_1 < ... < s_n = T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite()) {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if t0 < 0.0 {
            return Err(Error::InvalidGrid(format!("t0 = {t0} must be nonnegative")));
        }
        if t_end <= t0 {
            return Err(Error::InvalidGrid(format!("T = {t_end} must exceed t0 = {t0}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be positive".into()));
        }
        Ok(Self { t0, t_end, n_steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t0) / self.n_steps as f64
    }

    /// Node `k`; the last node is exactly `T`.
    pub fn node(&self, k: usize) -> f64 {
        debug_assert!(k <= self.n_steps);
        if k == self.n_steps {
            self.t_end
        } else {
            self.t0 + (self.t_end - self.t0) * (k as f64 / self.n_steps as f64)
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.node(k)).collect()
    }

    /// Index of the node equal to `t`, if `t` lies on the grid (relative tolerance 1e-9).
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let pos = (t - self.t0) / self.step();
        let k = pos.round();
        if k < 0.0 || k > self.n_steps as f64 {
            return None;
        }
        let tol = 1e-9 * (self.t_end - self.t0).max(1.0);
        ((self.node(k as usize) - t).abs() <= tol).then_some(k as usize)
    }

    /// The grid restricted to nodes `start..=n`.
    pub fn tail(&self, start: usize) -> Result<Self> {
        if start >= self.n_steps {
            return Err(Error::InvalidGrid(format!(
                "tail start {start} leaves no steps (n_steps = {})",
                self.n_steps
            )));
        }
        Ok(Self { t0: self.node(start), t_end: self.t_end, n_steps: self.n_steps - start })
    }
}

/// Shorthand for [`TimeGrid::new`].
pub fn make_grid(t0: f64, t_end: f64, n_steps: usize) -> Result<TimeGrid> {
    TimeGrid::new(t0, t_end, n_steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_in_quarters() {
        let g = make_grid(0.0, 1.0, 4).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.step(), 0.25);
    }

    #[test]
    fn single_step() {
        assert_eq!(make_grid(0.0, 2.0, 1).unwrap().nodes(), vec![0.0, 2.0]);
    }

    #[test]
    fn shifted_start() {
        assert_eq!(make_grid(0.5, 1.5, 2).unwrap().nodes(), vec![0.5, 1.0, 1.5]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(make_grid(1.0, 1.0, 4).is_err());
        assert!(make_grid(1.0, 0.5, 4).is_err());
        assert!(make_grid(0.0, 1.0, 0).is_err());
        assert!(make_grid(-0.1, 1.0, 3).is_err());
    }

    #[test]
    fn node_lookup() {
        let g = make_grid(0.0, 1.0, 8).unwrap();
        assert_eq!(g.node_index(0.375), Some(3));
        assert_eq!(g.node_index(1.0), Some(8));
        assert_eq!(g.node_index(0.3), None);
        assert_eq!(g.tail(2).unwrap().nodes()[0], 0.25);
    }
}
