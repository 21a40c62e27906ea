//! Time evolution of `i u_t = H u + N(u)`: the split-step propagator, the
//! modulated decomposition around a soliton, dispersive-norm tracking and the
//! linear decay diagnostics.

mod decay;
mod modulation;
mod propagator;
mod tracker;

pub use decay::{causal_grid, extend_operator, semigroup_decay, semigroup_decay_with, sobolev_norm, DecayReport, SOBOLEV_EPS};
pub use modulation::{
    evolve_modulated, initial_state, linear_forces, modulation_rhs, modulation_system, symplectic_project, symplectic_residuals,
    ModulationState, ModulationSystem, Trajectory, TrajectorySample,
};
pub use propagator::{step_full, Propagator};
pub use tracker::{NormTracker, TrackerValues, DEFAULT_ALPHA};

use crate::error::{DglError, Result};
use crate::grid::Grid;

/// Sup norm above which a run is declared blown up.
pub const BLOW_UP: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    StrangSplit,
    Rk4,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::StrangSplit => "strang_split",
            Scheme::Rk4 => "rk4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "strang_split" => Some(Scheme::StrangSplit),
            "rk4" => Some(Scheme::Rk4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub projection_tol: f64,
    /// Trajectory samples are kept every `record_stride` steps.
    pub record_stride: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { dt: 0.01, t_final: 10.0, scheme: Scheme::StrangSplit, projection_tol: 1e-10, record_stride: 10 }
    }
}

impl EvolutionConfig {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(DglError::InvalidArgument(format!("dt must be positive (got {})", self.dt)));
        }
        if self.dt > 0.5 * grid.dx() {
            return Err(DglError::InvalidArgument(format!("dt = {} exceeds the stability margin 0.5*dx = {}", self.dt, 0.5 * grid.dx())));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(DglError::InvalidArgument(format!("t_final must be finite and >= 0 (got {})", self.t_final)));
        }
        if !(self.projection_tol > 0.0) {
            return Err(DglError::InvalidArgument("projection_tol must be positive".into()));
        }
        if self.record_stride == 0 {
            return Err(DglError::InvalidArgument("record_stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; `t_final` is rounded to a whole number of steps.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let g = Grid::symmetric(20.0, 256).unwrap();
        let ok = EvolutionConfig { dt: 0.05, ..Default::default() };
        assert!(ok.validate(&g).is_ok());
        assert!(EvolutionConfig { dt: 0.1, ..ok }.validate(&g).is_err());
        assert!(EvolutionConfig { dt: -1.0, ..ok }.validate(&g).is_err());
        assert!(EvolutionConfig { record_stride: 0, ..ok }.validate(&g).is_err());
        assert_eq!(EvolutionConfig { dt: 0.05, t_final: 1.0, ..ok }.steps(), 20);
    }
}
