use serde::{Deserialize, Serialize};

use crate::error::{ItwError, Result};
use crate::units::Units;

/// Uniform position grid x_j = x_min + j*dx, j = 0..n (x_max excluded, FFT convention).
///
/// n must be a power of two >= 16 so the spectral transforms stay exact-size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(ItwError::InvalidInput(format!(
                "grid bounds must be finite with x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(ItwError::InvalidInput(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        Ok(SpatialGrid { x_min, x_max, n })
    }

    /// Symmetric box [-half_width, half_width).
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.x(j))
    }

    /// Index of the grid point nearest to x (clamped to the grid).
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx()).round();
        (j.max(0.0) as usize).min(self.n - 1)
    }
}

/// Momentum grid conjugate to a `SpatialGrid`: p_k = 2πħk/(n dx) for k in [-n/2, n/2).
///
/// Stored in ascending order, index j maps to k = j - n/2. The spacing satisfies
/// dp * dx * n = 2πħ by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub dp: f64,
    pub n: usize,
}

impl MomentumGrid {
    /// Conjugate grid of `spatial` under the symmetric transform convention.
    pub fn conjugate(spatial: &SpatialGrid, units: &Units) -> Self {
        let dp = 2.0 * std::f64::consts::PI * units.hbar / (spatial.n as f64 * spatial.dx());
        MomentumGrid { dp, n: spatial.n }
    }

    pub fn p(&self, j: usize) -> f64 {
        (j as f64 - self.n as f64 / 2.0) * self.dp
    }

    pub fn p_min(&self) -> f64 {
        self.p(0)
    }

    pub fn p_max(&self) -> f64 {
        self.p(self.n - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.p(j))
    }

    /// Fractional index of momentum p on this grid.
    pub fn index_of(&self, p: f64) -> f64 {
        p / self.dp + self.n as f64 / 2.0
    }
}
