//! Modulated evolution `u = e^{−iθ}(U(ω) + U₁)` around a soliton branch.
//!
//! `Y = e^{−iθ}U₁` is split as `Y = a u₀ + Z` with `⟨u₀, Z⟩ = 0`.  The full
//! field is advanced by the propagator; after each step `(ω, θ)` are
//! predicted from the modulation equations and corrected by a 2×2 Newton
//! solve of the symplectic orthogonality conditions
//! `Re⟨U, U₁⟩ = 0`, `Im⟨∂ωU, U₁⟩ = 0`.

use super::propagator::Propagator;
use super::tracker::{NormTracker, DEFAULT_ALPHA};
use super::EvolutionConfig;
use crate::dirac::DiracOperator;
use crate::error::{DglError, Result};
use crate::field::{inner_product, SpinorField};
use crate::linstab::{linearization_matrices, LinearizationMatrices};
use crate::nonlinearity::{eval_nonlinearity, Nonlinearity};
use crate::soliton::{ProfileJet, SolitonBranch};
use crate::spectral::{Derivative, Stencil};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
const NEWTON_MAX: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ModulationState {
    pub t: f64,
    pub omega: f64,
    pub theta: f64,
    /// `⟨u₀, Y⟩`.
    pub a: C64,
    pub z: SpinorField,
    pub y: SpinorField,
}

impl ModulationState {
    /// Builds the decomposition of `y` against the bound state `u0`.
    pub fn new(t: f64, omega: f64, theta: f64, y: SpinorField, u0: &SpinorField) -> Result<Self> {
        let a = inner_product(u0, &y)?;
        let z = y.axpy(-a, u0);
        Ok(Self { t, omega, theta, a, z, y })
    }

    /// `U₁ = e^{iθ} Y`.
    pub fn u1(&self) -> SpinorField {
        self.y.scale(C64::from_polar(1.0, self.theta))
    }

    /// `‖a u₀ + Z − Y‖`.
    pub fn decomposition_defect(&self, u0: &SpinorField) -> f64 {
        self.z.axpy(self.a, u0).sub(&self.y).l2_norm()
    }

    /// `|⟨u₀, Z⟩|`.
    pub fn orthogonality_defect(&self, u0: &SpinorField) -> f64 {
        inner_product(u0, &self.z).map(|c| c.norm()).unwrap_or(f64::INFINITY)
    }
}

/// `(Re⟨U, U₁⟩, Im⟨∂ωU, U₁⟩)`.
pub fn symplectic_residuals(jet: &ProfileJet, u1: &SpinorField) -> Result<(f64, f64)> {
    Ok((inner_product(&jet.u, u1)?.re, inner_product(&jet.du, u1)?.im))
}

/// Removes the generalised-kernel directions from `y` (taken at `θ = 0`):
/// `y − r ∂ωU − s iU` with `r, s` chosen so both symplectic conditions hold.
pub fn symplectic_project(jet: &ProfileJet, y: &SpinorField) -> Result<SpinorField> {
    let nprime = inner_product(&jet.u, &jet.du)?.re;
    if nprime == 0.0 {
        return Err(DglError::State("d/domega |U|^2 vanishes; the branch is degenerate".into()));
    }
    let (g1, g2) = symplectic_residuals(jet, y)?;
    Ok(y.axpy(C64::new(-g1 / nprime, 0.0), &jet.du).axpy(-I * (g2 / nprime), &jet.u))
}

/// The 2×2 system of the modulation equations
/// `M [ω̇, θ̇ − ω]ᵀ = [F₁, F₂]ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSystem {
    pub matrix: [[f64; 2]; 2],
    pub f1: f64,
    pub f2: f64,
    /// `½ d/dω ‖U‖² = Re⟨U, ∂ωU⟩`.
    pub norm_derivative: f64,
}

impl ModulationSystem {
    pub fn determinant(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Invertibility bound `0.1 · (½ d/dω‖U‖²)²`.
    pub fn determinant_bound(&self) -> f64 {
        0.1 * self.norm_derivative * self.norm_derivative
    }

    pub fn solve(&self) -> (f64, f64) {
        let m = &self.matrix;
        let det = self.determinant();
        ((self.f1 * m[1][1] - self.f2 * m[0][1]) / det, (m[0][0] * self.f2 - m[1][0] * self.f1) / det)
    }
}

fn hessian_terms(lm: &LinearizationMatrices, f: &SpinorField, sign12: f64) -> SpinorField {
    // V₁₁ f + sign12 · V₁₂ f̄
    let mut out = SpinorField::zeros(f.grid);
    for i in 0..f.len() {
        let (a, b) = (&lm.v11[i], &lm.v12[i]);
        let (x, y) = (f.u[i], f.v[i]);
        out.u[i] = a[0][0] * x + a[0][1] * y + (b[0][0] * x.conj() + b[0][1] * y.conj()) * sign12;
        out.v[i] = a[1][0] * x + a[1][1] * y + (b[1][0] * x.conj() + b[1][1] * y.conj()) * sign12;
    }
    out
}

/// Assembles the matrix and forces at the jet for the perturbation `u1`:
///
/// * `F₁ = Im[⟨U, ΔN⟩ + ⟨V₁₂Ū − V₁₁U, U₁⟩]`,
/// * `F₂ = Re[⟨∂ωU, ΔN⟩ − ⟨V₁₁∂ωU + V₁₂∂ωŪ, U₁⟩]`,
///
/// with `ΔN = N(U + U₁) − N(U)`.
pub fn modulation_system(jet: &ProfileJet, nl: &Nonlinearity, u1: &SpinorField) -> Result<ModulationSystem> {
    let (u, du, d2u) = (&jet.u, &jet.du, &jet.d2u);
    let lm = linearization_matrices(nl, u);
    let dn = eval_nonlinearity(nl, &u.add(u1)).sub(&eval_nonlinearity(nl, u));
    // V₁₂Ū − V₁₁U = −(V₁₁U − V₁₂Ū)
    let k1 = hessian_terms(&lm, u, -1.0).scale_re(-1.0);
    let k2 = hessian_terms(&lm, du, 1.0);
    let f1 = (inner_product(u, &dn)? + inner_product(&k1, u1)?).im;
    let f2 = (inner_product(du, &dn)? - inner_product(&k2, u1)?).re;
    let matrix =
        [[inner_product(du, &u.sub(u1))?.re, inner_product(u, u1)?.im], [inner_product(d2u, u1)?.im, inner_product(du, &u.add(u1))?.re]];
    Ok(ModulationSystem { matrix, f1, f2, norm_derivative: inner_product(u, du)?.re })
}

/// The parts of `F₁`, `F₂` linear in `U₁` (these cancel identically).
pub fn linear_forces(jet: &ProfileJet, nl: &Nonlinearity, u1: &SpinorField) -> Result<(f64, f64)> {
    let (u, du) = (&jet.u, &jet.du);
    let lm = linearization_matrices(nl, u);
    let lin = hessian_terms(&lm, u1, 1.0);
    let k1 = hessian_terms(&lm, u, -1.0).scale_re(-1.0);
    let k2 = hessian_terms(&lm, du, 1.0);
    let f1 = (inner_product(u, &lin)? + inner_product(&k1, u1)?).im;
    let f2 = (inner_product(du, &lin)? - inner_product(&k2, u1)?).re;
    Ok((f1, f2))
}

fn jet_at(branch: &SolitonBranch, omega: f64, t: f64) -> Result<ProfileJet> {
    branch.jet(omega).map_err(|_| {
        let (lo, hi) = branch.omega_range();
        DglError::ModulationBreakdown { t, det: f64::NAN, bound: (hi - lo).abs() }
    })
}

/// `(ω̇, θ̇ − ω)` from the modulation equations at `state`.
pub fn modulation_rhs(state: &ModulationState, branch: &SolitonBranch, nl: &Nonlinearity) -> Result<(f64, f64)> {
    let jet = jet_at(branch, state.omega, state.t)?;
    let sys = modulation_system(&jet, nl, &state.u1())?;
    let det = sys.determinant();
    let bound = sys.determinant_bound();
    if !(det > bound) {
        return Err(DglError::ModulationBreakdown { t: state.t, det, bound });
    }
    Ok(sys.solve())
}

/// Initial state at branch frequency `omega`, `θ = 0`, with the symplectically
/// projected perturbation `y0`.
pub fn initial_state(branch: &SolitonBranch, omega: f64, y0: &SpinorField) -> Result<ModulationState> {
    let jet = branch.jet(omega)?;
    let y = symplectic_project(&jet, y0)?;
    ModulationState::new(0.0, omega, 0.0, y, &branch.u0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub omega: f64,
    pub theta: f64,
    /// `θ(t) − ∫₀ᵗ ω`.
    pub theta_minus_int: f64,
    pub a_abs: f64,
    pub y_sup: f64,
    pub y_h1: f64,
    /// Charge of the full field.
    pub charge: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub tracker: NormTracker,
    pub final_state: ModulationState,
    /// Largest symplectic residual after correction.
    pub max_projection_residual: f64,
    /// Largest gap between the modulation-equation predictor and the corrected `(ω, θ)`.
    pub max_modulation_defect: f64,
    pub max_decomposition_defect: f64,
    pub max_orthogonality_defect: f64,
    pub steps: usize,
}

/// Spread of `values` over the second half of the samples against the
/// largest excursion from the initial value: `(variation, total)`.
fn late_variation(samples: &[TrajectorySample], f: impl Fn(&TrajectorySample) -> f64) -> (f64, f64) {
    let Some(first) = samples.first() else { return (0.0, 0.0) };
    let t_end = samples.last().unwrap().t;
    let v0 = f(first);
    let total = samples.iter().map(|s| (f(s) - v0).abs()).fold(0.0, f64::max);
    let late: Vec<f64> = samples.iter().filter(|s| s.t >= 0.5 * t_end).map(&f).collect();
    let lo = late.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = late.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo, total)
}

impl Trajectory {
    /// `(variation of ω over [T/2, T], max |ω(t) − ω(0)|)`.
    pub fn omega_convergence(&self) -> (f64, f64) {
        late_variation(&self.samples, |s| s.omega)
    }

    /// Same for `θ − ∫ω`.
    pub fn phase_convergence(&self) -> (f64, f64) {
        late_variation(&self.samples, |s| s.theta_minus_int)
    }

    /// `|ω(T) − ω(0)|`.
    pub fn omega_drift(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => (b.omega - a.omega).abs(),
            _ => 0.0,
        }
    }

    /// `max_t ‖Y‖_∞ / ‖Y(T)‖_∞`.
    pub fn sup_decay_factor(&self) -> f64 {
        let max = self.samples.iter().map(|s| s.y_sup).fold(0.0, f64::max);
        max / self.samples.last().map_or(f64::NAN, |s| s.y_sup)
    }
}

fn h1_norm(deriv: &Derivative, y: &SpinorField) -> f64 {
    let d = SpinorField { grid: y.grid, u: deriv.apply_vec(&y.u), v: deriv.apply_vec(&y.v) };
    (y.charge() + d.charge()).sqrt()
}

/// Integrates the modulated system from `init`.
///
/// With `branch = None` (requires `nl = none`) the run is the linear
/// reference: `Z` follows the `P_ac`-projected linear flow and `a` rotates at
/// the eigenfrequency.
pub fn evolve_modulated(
    init: &ModulationState,
    branch: Option<&SolitonBranch>,
    op: &DiracOperator,
    nl: &Nonlinearity,
    config: &EvolutionConfig,
) -> Result<Trajectory> {
    let grid = *op.grid();
    config.validate(&grid)?;
    init.y.check_same_grid(&SpinorField::zeros(grid))?;
    let bound = op.bound_state()?.clone();
    let u0 = &bound.u0;
    let prop = Propagator::new(op, nl, config.dt, config.scheme)?;
    let deriv = Derivative::new(&grid, Stencil::Spectral);
    let mut tracker = NormTracker::new(grid, DEFAULT_ALPHA);
    let steps = config.steps();
    let dt = config.dt;
    let tol = config.projection_tol;

    let mut state = ModulationState::new(init.t, init.omega, init.theta, init.y.clone(), u0)?;
    let mut int_omega = 0.0;
    let theta0 = init.theta;
    let mut max_proj: f64 = 0.0;
    let mut max_mod: f64 = 0.0;
    let mut max_dec: f64 = 0.0;
    let mut max_orth: f64 = 0.0;
    let mut samples = vec![];

    let record = |state: &ModulationState, field_charge: f64, int_omega: f64, samples: &mut Vec<TrajectorySample>| {
        samples.push(TrajectorySample {
            t: state.t,
            omega: state.omega,
            theta: state.theta,
            theta_minus_int: state.theta - theta0 - int_omega,
            a_abs: state.a.norm(),
            y_sup: state.y.sup_norm(),
            y_h1: h1_norm(&deriv, &state.y),
            charge: field_charge,
        });
    };

    match branch {
        None => {
            if !nl.is_none() {
                return Err(DglError::InvalidArgument("a nonlinear run needs a soliton branch".into()));
            }
            let rot = C64::from_polar(1.0, -bound.omega * dt);
            tracker.push(state.t, &state.y);
            record(&state, state.y.charge(), 0.0, &mut samples);
            let mut z = state.z.clone();
            let mut a = state.a;
            for n in 1..=steps {
                let t_prev = state.t;
                prop.step(&mut z, t_prev)?;
                let c = inner_product(u0, &z)?;
                z.axpy_in_place(-c, u0);
                a *= rot;
                let y = z.axpy(a, u0);
                int_omega += dt * state.omega;
                state = ModulationState {
                    t: init.t + n as f64 * dt,
                    omega: state.omega,
                    theta: state.theta + dt * state.omega,
                    a,
                    z: z.clone(),
                    y,
                };
                max_dec = max_dec.max(state.decomposition_defect(u0));
                max_orth = max_orth.max(state.orthogonality_defect(u0));
                tracker.push(state.t, &state.y);
                if n % config.record_stride == 0 || n == steps {
                    record(&state, state.y.charge(), int_omega, &mut samples);
                }
            }
        }
        Some(branch) => {
            if branch.operator.grid() != &grid {
                return Err(DglError::Dimension("branch and operator grids differ".into()));
            }
            let jet = jet_at(branch, state.omega, state.t)?;
            let mut u = jet.u.scale(C64::from_polar(1.0, -state.theta)).add(&state.y);
            tracker.push(state.t, &state.y);
            record(&state, u.charge(), 0.0, &mut samples);
            for n in 1..=steps {
                let (wdot, tdm) = modulation_rhs(&state, branch, nl)?;
                prop.step(&mut u, state.t)?;
                let t = init.t + n as f64 * dt;
                let omega_p = state.omega + dt * wdot;
                let theta_p = state.theta + dt * (tdm + 0.5 * (state.omega + omega_p));
                let (mut omega, mut theta) = (omega_p, theta_p);
                let mut resid = f64::INFINITY;
                let mut jet = jet_at(branch, omega, t)?;
                for _ in 0..NEWTON_MAX {
                    let u1 = u.scale(C64::from_polar(1.0, theta)).sub(&jet.u);
                    let (g1, g2) = symplectic_residuals(&jet, &u1)?;
                    resid = g1.abs().max(g2.abs());
                    if resid <= tol {
                        break;
                    }
                    let j = [
                        [-inner_product(&jet.du, &jet.u.sub(&u1))?.re, -inner_product(&jet.u, &u1)?.im],
                        [inner_product(&jet.d2u, &u1)?.im, inner_product(&jet.du, &jet.u.add(&u1))?.re],
                    ];
                    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                    let dw = (-g1 * j[1][1] + g2 * j[0][1]) / det;
                    let dth = (-g2 * j[0][0] + g1 * j[1][0]) / det;
                    omega += dw;
                    theta += dth;
                    jet = jet_at(branch, omega, t)?;
                }
                if resid > 10.0 * tol {
                    return Err(DglError::Projection { t, residual: resid, bound: 10.0 * tol });
                }
                max_proj = max_proj.max(resid);
                max_mod = max_mod.max((omega - omega_p).abs()).max((theta - theta_p).abs());
                int_omega += 0.5 * dt * (state.omega + omega);
                let y = u.sub(&jet.u.scale(C64::from_polar(1.0, -theta)));
                state = ModulationState::new(t, omega, theta, y, u0)?;
                max_dec = max_dec.max(state.decomposition_defect(u0));
                max_orth = max_orth.max(state.orthogonality_defect(u0));
                tracker.push(t, &state.y);
                if n % config.record_stride == 0 || n == steps {
                    record(&state, u.charge(), int_omega, &mut samples);
                }
            }
        }
    }
    Ok(Trajectory {
        samples,
        tracker,
        final_state: state,
        max_projection_residual: max_proj,
        max_modulation_defect: max_mod,
        max_decomposition_defect: max_dec,
        max_orthogonality_defect: max_orth,
        steps,
    })
}
