//! The Dirac operator `H = D + V`, its discrete point spectrum and the
//! projection onto the continuous spectrum.

use std::sync::{Arc, OnceLock};

use crate::error::{DglError, Result};
use crate::field::{inner_product, SpinorField};
use crate::grid::Grid;
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::potential::PotentialPair;
use crate::spectral::{Derivative, Stencil};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Open spectral window `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

impl Default for Window {
    /// `(-1 + 1e-6, 1 - 1e-6)`.
    fn default() -> Self {
        Self { lo: -1.0 + 1e-6, hi: 1.0 - 1e-6 }
    }
}

/// A gap eigenvalue with its normalised eigenfunction.
///
/// The eigenfunction's phase is fixed so that `u₀ = (φ, φ̄)`, matching the
/// symmetry of the soliton branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub omega: f64,
    pub u0: SpinorField,
    /// Largest `|u₀|` over the outer 5% of the domain.
    pub boundary_amplitude: f64,
    /// Set when the boundary amplitude exceeds `1e-6`.
    pub truncation_warning: bool,
}

/// Fraction of the domain, on each side, inspected for decay.
const EDGE_FRACTION: f64 = 0.05;
/// Boundary-to-peak ratio above which an eigenvector counts as box continuum.
const CONTINUUM_RATIO: f64 = 1e-2;
const DECAY_TOL: f64 = 1e-6;

#[derive(Clone)]
pub struct DiracOperator {
    grid: Grid,
    potential: PotentialPair,
    deriv: Arc<Derivative>,
    bound: Arc<OnceLock<std::result::Result<BoundState, DglError>>>,
}

impl std::fmt::Debug for DiracOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiracOperator").field("grid", &self.grid).field("stencil", &self.deriv.stencil()).finish()
    }
}

impl DiracOperator {
    pub fn new(grid: Grid, potential: PotentialPair, stencil: Stencil) -> Result<Self> {
        if potential.beta.len() != grid.n_points() || potential.gamma.len() != grid.n_points() {
            return Err(DglError::Dimension("potential is sampled on a different grid".into()));
        }
        Ok(Self { grid, deriv: Arc::new(Derivative::new(&grid, stencil)), potential, bound: Arc::new(OnceLock::new()) })
    }

    /// Operator with a known bound state (e.g. computed on a smaller box and
    /// embedded).  The eigenrelation is checked to `tol`.
    pub fn with_bound_state(grid: Grid, potential: PotentialPair, stencil: Stencil, bound: BoundState, tol: f64) -> Result<Self> {
        let op = Self::new(grid, potential, stencil)?;
        bound.u0.check_same_grid(&SpinorField::zeros(grid))?;
        let norm = bound.u0.charge();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(DglError::State(format!("bound state is not normalised (|u0|^2 = {norm})")));
        }
        let res = op.apply(&bound.u0)?.axpy(C64::new(-bound.omega, 0.0), &bound.u0).l2_norm();
        if res > tol {
            return Err(DglError::State(format!("supplied bound state has eigen-residual {res:.3e}")));
        }
        let _ = op.bound.set(Ok(bound));
        Ok(op)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &PotentialPair {
        &self.potential
    }

    pub fn stencil(&self) -> Stencil {
        self.deriv.stencil()
    }

    pub fn derivative(&self) -> &Derivative {
        &self.deriv
    }

    /// `H f = (−i u′ + βu + (γ−1)v, i v′ + βv + (γ−1)u)`.
    pub fn apply(&self, f: &SpinorField) -> Result<SpinorField> {
        if f.grid != self.grid {
            return Err(DglError::Dimension("field and operator grids differ".into()));
        }
        let du = self.deriv.apply_vec(&f.u);
        let dv = self.deriv.apply_vec(&f.v);
        let (b, g) = (&self.potential.beta, &self.potential.gamma);
        let n = f.len();
        let mut out = SpinorField::zeros(self.grid);
        for i in 0..n {
            out.u[i] = -I * du[i] + f.u[i] * b[i] + f.v[i] * (g[i] - 1.0);
            out.v[i] = I * dv[i] + f.v[i] * b[i] + f.u[i] * (g[i] - 1.0);
        }
        Ok(out)
    }

    /// Dense `2n×2n` matrix, unknowns ordered `[u_0..u_{n-1}, v_0..v_{n-1}]`.
    pub fn matrix(&self) -> CMatrix {
        let n = self.grid.n_points();
        let d = self.deriv.matrix(n);
        let mut m = CMatrix::zeros(2 * n);
        for j in 0..n {
            for l in 0..n {
                let djl = d[j * n + l];
                if djl != 0.0 {
                    m.set(j, l, -I * djl);
                    m.set(n + j, n + l, I * djl);
                }
            }
            let b = self.potential.beta[j];
            let g = self.potential.gamma[j] - 1.0;
            m.add(j, j, C64::new(b, 0.0));
            m.add(n + j, n + j, C64::new(b, 0.0));
            m.set(j, n + j, C64::new(g, 0.0));
            m.set(n + j, j, C64::new(g, 0.0));
        }
        m
    }

    /// Gap eigenvalues inside `window` with normalised eigenfunctions.
    ///
    /// Eigenvectors that do not decay (boundary-to-peak ratio above 1e-2) are
    /// discretised continuum squeezed into the gap by the finite box and are
    /// dropped.
    pub fn point_spectrum(&self, window: Window) -> Result<Vec<BoundState>> {
        if !(window.lo >= -1.0 && window.hi <= 1.0 && window.lo < window.hi) {
            return Err(DglError::InvalidArgument(format!("window ({}, {}) must lie inside (-1, 1)", window.lo, window.hi)));
        }
        let n = self.grid.n_points();
        let eig = hermitian_eigen(&self.matrix(), true)?;
        let mut out = vec![];
        for (k, &lam) in eig.values.iter().enumerate() {
            if !window.contains(lam) {
                continue;
            }
            let vec = &eig.vectors[k];
            let f = SpinorField { grid: self.grid, u: vec[..n].to_vec(), v: vec[n..].to_vec() };
            let f = normalise_phase(f);
            let modulus = f.modulus();
            let peak = modulus.iter().cloned().fold(0.0, f64::max);
            let edge = ((EDGE_FRACTION * n as f64).ceil() as usize).max(1);
            let boundary = modulus[..edge].iter().chain(&modulus[n - edge..]).cloned().fold(0.0, f64::max);
            if boundary > CONTINUUM_RATIO * peak {
                continue;
            }
            out.push(BoundState { omega: lam, u0: f, boundary_amplitude: boundary, truncation_warning: boundary > DECAY_TOL });
        }
        Ok(out)
    }

    /// The single bound state of the operator, computed on first use.
    pub fn bound_state(&self) -> Result<&BoundState> {
        let r = self.bound.get_or_init(|| {
            let states = self.point_spectrum(Window::default())?;
            match states.len() {
                1 => Ok(states.into_iter().next().unwrap()),
                k => Err(DglError::State(format!("expected exactly one gap eigenvalue, found {k}"))),
            }
        });
        r.as_ref().map_err(Clone::clone)
    }

    /// `f − ⟨u₀, f⟩u₀`.
    pub fn pac_project(&self, f: &SpinorField) -> Result<SpinorField> {
        let b = self.bound_state()?;
        let c = inner_product(&b.u0, f)?;
        Ok(f.axpy(-c, &b.u0))
    }

    /// `(γ⁺, γ⁻)`, the edge-resonance integrals at `k = 0`.
    pub fn resonance_indicator(&self) -> Result<(C64, C64)> {
        crate::scattering::resonance_indicator(self)
    }
}

/// Fixes the phase of an eigenvector of a simple eigenvalue so that
/// `v = conj(u)`, then symmetrises and normalises.
pub(crate) fn normalise_phase(f: SpinorField) -> SpinorField {
    // J(u, v) = (v̄, ū) commutes with H; for a simple eigenvalue J f = e^{iχ} f.
    let jf = SpinorField { grid: f.grid, u: f.v.iter().map(|z| z.conj()).collect(), v: f.u.iter().map(|z| z.conj()).collect() };
    let c = inner_product(&f, &jf).unwrap();
    let chi = c.arg();
    let rot = C64::from_polar(1.0, 0.5 * chi);
    let g = f.scale(rot);
    let mut phi: Vec<C64> = g.u.iter().zip(&g.v).map(|(a, b)| (a + b.conj()) * 0.5).collect();
    let imax = phi.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).map(|(i, _)| i).unwrap_or(0);
    if phi[imax].re < 0.0 {
        phi.iter_mut().for_each(|z| *z = -*z);
    }
    let out = SpinorField { grid: f.grid, v: phi.iter().map(|z| z.conj()).collect(), u: phi };
    let nrm = out.l2_norm();
    out.scale_re(1.0 / nrm)
}
