use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{precision_bits, Scalar};

/// Scan grid density multiplier used when none is given.
pub const DEFAULT_GRID_FACTOR: usize = 32;

/// Smallest scan grid, whatever the degree.
pub const MIN_SCAN_GRID: usize = 2048;

/// Knobs shared by the unconstrained and the convex solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once the relative gap between the certified bounds drops below this.
    pub tol_rel: Scalar,
    /// The error scan uses `max(2048, grid_factor * (n + 2))` points.
    pub grid_factor: usize,
}

impl SolverOptions {
    pub fn new(tol_rel: Scalar) -> Result<Self> {
        let opts = SolverOptions {
            tol_rel,
            grid_factor: DEFAULT_GRID_FACTOR,
        };
        opts.validate()?;
        Ok(opts)
    }

    pub fn with_grid_factor(mut self, grid_factor: usize) -> Result<Self> {
        self.grid_factor = grid_factor;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let cap = Scalar::ratio(1, 1000);
        if !self.tol_rel.is_positive() || self.tol_rel > cap {
            return Err(Error::InvalidInput(format!(
                "tol_rel must lie in (0, 1e-3], got {}",
                self.tol_rel
            )));
        }
        if self.grid_factor == 0 {
            return Err(Error::InvalidInput("grid_factor must be positive".into()));
        }
        Ok(())
    }

    /// Number of scan points for degree `n`.
    pub fn scan_size(&self, n: usize) -> usize {
        MIN_SCAN_GRID.max(self.grid_factor * (n + 2))
    }
}

impl Default for SolverOptions {
    /// `tol_rel = 1e-10`.
    fn default() -> Self {
        SolverOptions {
            tol_rel: Scalar::ratio(1, 10_000_000_000),
            grid_factor: DEFAULT_GRID_FACTOR,
        }
    }
}

/// Magnitude below which a computed error is indistinguishable from rounding.
pub(crate) fn noise_floor(reference_magnitude: &Scalar) -> Scalar {
    Scalar::pow2(-(precision_bits() as i32 - 24)) * &(Scalar::one() + reference_magnitude)
}
