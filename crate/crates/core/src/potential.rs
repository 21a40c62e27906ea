//! Decaying real potentials `β`, `γ` with a checked decay certificate.

use crate::error::{DglError, Result};
use crate::grid::Grid;

/// Continuous description of a potential, needed off the grid by the Jost
/// integrator.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Zero,
    /// `β = beta·sech²(κx/2)`, `γ = gamma·sech²(κx/2)`.
    Sech2 {
        beta: f64,
        gamma: f64,
        kappa: f64,
    },
    /// Grid samples; values between nodes by cubic (Catmull–Rom) interpolation,
    /// zero outside the grid.
    Sampled {
        x0: f64,
        dx: f64,
        beta: Vec<f64>,
        gamma: Vec<f64>,
    },
}

impl Profile {
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            Profile::Zero => (0.0, 0.0),
            Profile::Sech2 { beta, gamma, kappa } => {
                let s = 1.0 / (0.5 * kappa * x).cosh();
                let s2 = s * s;
                (beta * s2, gamma * s2)
            }
            Profile::Sampled { x0, dx, beta, gamma } => (catmull_rom(beta, *x0, *dx, x), catmull_rom(gamma, *x0, *dx, x)),
        }
    }
}

fn catmull_rom(y: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    let n = y.len();
    let s = (x - x0) / dx;
    if !(s >= 0.0 && s <= (n - 1) as f64) {
        return 0.0;
    }
    let i = (s.floor() as usize).min(n - 2);
    let t = s - i as f64;
    let at = |j: isize| -> f64 {
        if j < 0 || j as usize >= n {
            0.0
        } else {
            y[j as usize]
        }
    };
    let (p0, p1, p2, p3) = (at(i as isize - 1), at(i as isize), at(i as isize + 1), at(i as isize + 2));
    0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t)
}

/// Real potentials `β`, `γ` sampled on a grid together with the certificate
/// `|β(x)| + |γ(x)| ≤ C e^{-κ|x|}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPair {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub kappa: f64,
    pub c_bound: f64,
    profile: Profile,
}

impl PotentialPair {
    pub fn new(grid: &Grid, profile: Profile, kappa: f64, c_bound: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(DglError::DecayCertificate(format!("kappa must be positive (got {kappa})")));
        }
        if !(c_bound > 0.0 && c_bound.is_finite()) {
            return Err(DglError::DecayCertificate(format!("c_bound must be positive (got {c_bound})")));
        }
        let (beta, gamma): (Vec<f64>, Vec<f64>) = grid.nodes().iter().map(|&x| profile.eval(x)).unzip();
        for (i, x) in grid.nodes().into_iter().enumerate() {
            let lhs = beta[i].abs() + gamma[i].abs();
            let rhs = c_bound * (-kappa * x.abs()).exp();
            if !lhs.is_finite() || lhs > rhs * (1.0 + 1e-12) + 1e-300 {
                return Err(DglError::DecayCertificate(format!(
                    "|beta| + |gamma| = {lhs:.6e} exceeds C e^(-kappa|x|) = {rhs:.6e} at x = {x}"
                )));
            }
        }
        Ok(Self { beta, gamma, kappa, c_bound, profile })
    }

    pub fn zero(grid: &Grid) -> Self {
        Self::new(grid, Profile::Zero, 1.0, 1.0).expect("zero potential is certified")
    }

    /// `β = b·sech²(κx/2)`, `γ = g·sech²(κx/2)` with `C = 4(|b| + |g|)`.
    pub fn sech2(grid: &Grid, b: f64, g: f64, kappa: f64) -> Result<Self> {
        let c = (4.0 * (b.abs() + g.abs())).max(f64::MIN_POSITIVE);
        Self::new(grid, Profile::Sech2 { beta: b, gamma: g, kappa }, kappa, c)
    }

    /// The reference potential `β = -0.6 sech²x`, `γ = 0.3 sech²x`: one simple
    /// gap eigenvalue (≈ 0.5909) and a non-resonant lower edge.
    pub fn reference(grid: &Grid) -> Self {
        Self::sech2(grid, REFERENCE_BETA, REFERENCE_GAMMA, 2.0).expect("reference potential is certified")
    }

    /// A `β ≡ 0` potential (`γ = -0.3 sech²x`) for the symmetry checks that
    /// need it.  It has no gap eigenvalue.
    pub fn symmetric_reference(grid: &Grid) -> Self {
        Self::sech2(grid, 0.0, -0.3, 2.0).expect("certified")
    }

    /// Grid samples with a user-supplied certificate.
    pub fn from_samples(grid: &Grid, beta: Vec<f64>, gamma: Vec<f64>, kappa: f64, c_bound: f64) -> Result<Self> {
        let n = grid.n_points();
        if beta.len() != n || gamma.len() != n {
            return Err(DglError::Dimension("potential samples do not match the grid".into()));
        }
        let profile = Profile::Sampled { x0: grid.x_min(), dx: grid.dx(), beta, gamma };
        Self::new(grid, profile, kappa, c_bound)
    }

    /// Same profile resampled on another grid.
    pub fn resample(&self, grid: &Grid) -> Result<Self> {
        Self::new(grid, self.profile.clone(), self.kappa, self.c_bound)
    }

    /// `ε·V`.
    pub fn scaled(&self, grid: &Grid, eps: f64) -> Result<Self> {
        let profile = match &self.profile {
            Profile::Zero => Profile::Zero,
            Profile::Sech2 { beta, gamma, kappa } => Profile::Sech2 { beta: eps * beta, gamma: eps * gamma, kappa: *kappa },
            Profile::Sampled { x0, dx, beta, gamma } => Profile::Sampled {
                x0: *x0,
                dx: *dx,
                beta: beta.iter().map(|b| eps * b).collect(),
                gamma: gamma.iter().map(|g| eps * g).collect(),
            },
        };
        Self::new(grid, profile, self.kappa, (self.c_bound * eps.abs()).max(f64::MIN_POSITIVE))
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        self.profile.eval(x)
    }

    pub fn is_zero(&self) -> bool {
        self.beta.iter().chain(&self.gamma).all(|&b| b == 0.0)
    }

    pub fn beta_vanishes(&self) -> bool {
        self.beta.iter().all(|&b| b == 0.0)
    }
}

pub const REFERENCE_BETA: f64 = -0.6;
pub const REFERENCE_GAMMA: f64 = 0.3;
