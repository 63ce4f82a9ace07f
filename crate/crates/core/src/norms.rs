//! Discrete L1 error norm on cell midpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform partition of `[0, s_max]` into `k` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorGrid {
    pub k: usize,
    pub s_max: f64,
}

impl Default for ErrorGrid {
    /// `[0, 10]` with 1000 cells of width 0.01.
    fn default() -> Self {
        ErrorGrid { k: 1000, s_max: 10.0 }
    }
}

impl ErrorGrid {
    pub fn new(k: usize, s_max: f64) -> Result<Self> {
        if k == 0 || !(s_max > 0.0) {
            return Err(Error::InvalidInput(format!("bad error grid: K = {k}, s_max = {s_max}")));
        }
        Ok(ErrorGrid { k, s_max })
    }

    pub fn width(&self) -> f64 {
        self.s_max / self.k as f64
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        let w = self.width();
        (0..self.k).map(move |j| (j as f64 + 0.5) * w)
    }
}

/// `Σ_j |approx(s_j) − reference(s_j)| h_j` over the cell midpoints.
pub fn error_norm<A, R>(approx: A, reference: R, grid: &ErrorGrid) -> f64
where
    A: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    let w = grid.width();
    grid.midpoints().map(|s| (approx(s) - reference(s)).abs() * w).sum()
}
