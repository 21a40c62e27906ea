//! Running space-time norms of a trajectory.
//!
//! * `‖Y‖_{L⁴ₜL^∞ₓ}` and the per-node `∫|Y(xᵢ,t)|² dt` use the trapezoid rule
//!   in time, so a tracker continued from `T/2` to `T` reproduces the one run
//!   over `[0, T]` exactly;
//! * `‖Y‖_{L^∞ₜH¹ₓ}` is a running maximum over samples;
//! * the local norms `‖⟨x⟩^{−α}Y‖_{L^∞ₓL²ₜ}` (and with `∂ₓY`) take the maximum
//!   over nodes of the weighted per-node integrals.

use crate::field::SpinorField;
use crate::grid::Grid;
use crate::spectral::{Derivative, Stencil};

/// Weight exponent: above both 3/2 and 2.
pub const DEFAULT_ALPHA: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackerValues {
    /// `‖Y‖_{L⁴ₜL^∞ₓ}`.
    pub strichartz: f64,
    /// `‖Y‖_{L^∞ₜH¹ₓ}`.
    pub energy: f64,
    /// `‖⟨x⟩^{−α}Y‖_{L^∞ₓL²ₜ}`.
    pub local: f64,
    /// `‖⟨x⟩^{−α}∂ₓY‖_{L^∞ₓL²ₜ}`.
    pub local_dx: f64,
}

#[derive(Debug, Clone)]
pub struct NormTracker {
    pub alpha: f64,
    grid: Grid,
    deriv: Derivative,
    weight: Vec<f64>,
    last: Option<Sample>,
    linf4: f64,
    h1_max: f64,
    node_l2: Vec<f64>,
    node_l2_dx: Vec<f64>,
    samples: usize,
}

#[derive(Debug, Clone)]
struct Sample {
    t: f64,
    sup4: f64,
    mod2: Vec<f64>,
    dmod2: Vec<f64>,
}

impl NormTracker {
    pub fn new(grid: Grid, alpha: f64) -> Self {
        // ⟨x⟩^{−2α}
        let weight = grid.nodes().iter().map(|x| (1.0 + x * x).powf(-alpha)).collect();
        Self {
            alpha,
            grid,
            deriv: Derivative::new(&grid, Stencil::Spectral),
            weight,
            last: None,
            linf4: 0.0,
            h1_max: 0.0,
            node_l2: vec![0.0; grid.n_points()],
            node_l2_dx: vec![0.0; grid.n_points()],
            samples: 0,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Time of the most recent sample.
    pub fn last_time(&self) -> Option<f64> {
        self.last.as_ref().map(|s| s.t)
    }

    /// Adds the sample `y` at time `t` (times must increase).
    pub fn push(&mut self, t: f64, y: &SpinorField) {
        let du = self.deriv.apply_vec(&y.u);
        let dv = self.deriv.apply_vec(&y.v);
        let mod2: Vec<f64> = y.u.iter().zip(&y.v).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect();
        let dmod2: Vec<f64> = du.iter().zip(&dv).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect();
        let sup2 = mod2.iter().cloned().fold(0.0, f64::max);
        let sup4 = sup2 * sup2;
        let dx = self.grid.dx();
        let h1 = ((mod2.iter().sum::<f64>() + dmod2.iter().sum::<f64>()) * dx).sqrt();
        self.h1_max = self.h1_max.max(h1);
        if let Some(prev) = &self.last {
            let h = 0.5 * (t - prev.t);
            self.linf4 += h * (prev.sup4 + sup4);
            for i in 0..mod2.len() {
                self.node_l2[i] += h * (prev.mod2[i] + mod2[i]);
                self.node_l2_dx[i] += h * (prev.dmod2[i] + dmod2[i]);
            }
        }
        self.last = Some(Sample { t, sup4, mod2, dmod2 });
        self.samples += 1;
    }

    pub fn values(&self) -> TrackerValues {
        let wmax = |v: &[f64]| v.iter().zip(&self.weight).map(|(a, w)| (a * w).sqrt()).fold(0.0, f64::max);
        TrackerValues {
            strichartz: self.linf4.powf(0.25),
            energy: self.h1_max,
            local: wmax(&self.node_l2),
            local_dx: wmax(&self.node_l2_dx),
        }
    }
}
