//! Uniform symmetric grids.

use crate::error::{DglError, Result};

/// Uniform grid on `[x_min, x_max]` with `x_max = -x_min`, both ends included.
///
/// For transforms and periodic stencils the `n` nodes are treated as one
/// period of length `n·dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
}

impl Grid {
    pub const MIN_POINTS: usize = 64;

    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(DglError::Grid("bounds must be finite".into()));
        }
        if n_points < Self::MIN_POINTS || n_points % 2 != 0 {
            return Err(DglError::Grid(format!("n_points must be even and >= {} (got {n_points})", Self::MIN_POINTS)));
        }
        if x_max <= x_min {
            return Err(DglError::Grid(format!("dx > 0 requires x_max > x_min (got [{x_min}, {x_max}])")));
        }
        if (x_max + x_min).abs() > 1e-12 * x_max.abs().max(1.0) {
            return Err(DglError::Grid(format!("domain must be symmetric, x_max = -x_min (got [{x_min}, {x_max}])")));
        }
        Ok(Self { x_min, x_max, n: n_points, dx: (x_max - x_min) / (n_points - 1) as f64 })
    }

    /// `[-half_width, half_width]` with `n_points` nodes.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    /// Grid with the given spacing covering at least `[-half_width, half_width]`.
    /// The point count is rounded up to an even number.
    pub fn with_spacing(half_width: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(DglError::Grid("spacing must be positive".into()));
        }
        let mut intervals = (2.0 * half_width / dx).round() as usize;
        if intervals % 2 == 0 {
            intervals += 1;
        }
        let hw = 0.5 * intervals as f64 * dx;
        Self::symmetric(hw, intervals + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn n_points(&self) -> usize {
        self.n
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    /// Length of the periodic cell, `n·dx`.
    pub fn period(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Index of the node closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.dx).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Angular wavenumbers in FFT order.  The Nyquist entry is zeroed so odd
    /// derivatives stay real on real data.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n;
        let dk = 2.0 * std::f64::consts::PI / self.period();
        (0..n)
            .map(|j| {
                if j < n / 2 {
                    j as f64 * dk
                } else if j == n / 2 {
                    0.0
                } else {
                    (j as f64 - n as f64) * dk
                }
            })
            .collect()
    }

    /// Same spacing, `n_points` nodes (used to embed fields in bigger boxes).
    pub fn extended(&self, n_points: usize) -> Result<Self> {
        let hw = 0.5 * (n_points - 1) as f64 * self.dx;
        Self::symmetric(hw, n_points)
    }
}

impl Default for Grid {
    /// `[-40, 40]` with 2048 nodes.
    fn default() -> Self {
        Self::symmetric(40.0, 2048).expect("default grid is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_matches_definition() {
        let g = Grid::symmetric(40.0, 512).unwrap();
        assert!((g.dx() - 80.0 / 511.0).abs() < 1e-15);
        assert_eq!(g.x(0), -40.0);
        assert!((g.x(511) - 40.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::symmetric(40.0, 0).is_err());
        assert!(Grid::symmetric(40.0, 63).is_err());
        assert!(Grid::symmetric(40.0, 65).is_err());
        assert!(Grid::new(-1.0, 2.0, 64).is_err());
        assert!(Grid::new(1.0, -1.0, 64).is_err());
    }

    #[test]
    fn spacing_constructor_keeps_dx() {
        let g = Grid::symmetric(40.0, 1024).unwrap();
        let h = Grid::with_spacing(120.0, g.dx()).unwrap();
        assert!((h.dx() - g.dx()).abs() < 1e-14);
        assert!(h.x_max() >= 119.9);
        assert_eq!(h.n_points() % 2, 0);
    }

    #[test]
    fn extended_grid_shares_nodes() {
        let g = Grid::symmetric(40.0, 512).unwrap();
        let h = g.extended(1024).unwrap();
        let off = (1024 - 512) / 2;
        for i in [0, 100, 511] {
            assert!((h.x(i + off) - g.x(i)).abs() < 1e-11);
        }
    }
}
