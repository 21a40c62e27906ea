//! Stationary gap solitons: the explicit homogeneous-case family and the
//! continued branch bifurcating from the gap eigenvalue.

use crate::dirac::DiracOperator;
use crate::error::{DglError, Result};
use crate::field::{inner_product, SpinorField};
use crate::grid::Grid;
use crate::linalg::RealLu;
use crate::nonlinearity::{eval_nonlinearity, Nonlinearity};
use crate::C64;

pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 50;

/// The explicit solution of the homogeneous problem (`β = γ = 0`, Bragg
/// nonlinearity with `α = 1/3`):
/// `U = √(1−ω²) / (√(1−ω) cosh(√(1−ω²)x) + i√(1+ω) sinh(√(1−ω²)x))`, `V = Ū`.
pub fn explicit_soliton(omega: f64, grid: Grid) -> Result<SpinorField> {
    if !(omega.abs() < 1.0) {
        return Err(DglError::InvalidArgument(format!("explicit soliton needs |omega| < 1 (got {omega})")));
    }
    let s = (1.0 - omega * omega).sqrt();
    let (cm, cp) = ((1.0 - omega).sqrt(), (1.0 + omega).sqrt());
    Ok(SpinorField::from_fn(grid, |x| {
        let u = C64::new(s, 0.0) / C64::new(cm * (s * x).cosh(), cp * (s * x).sinh());
        (u, u.conj())
    }))
}

/// `‖(H − ω)U + N(U)‖_{L²}`.
pub fn stationary_residual(op: &DiracOperator, nl: &Nonlinearity, omega: f64, u: &SpinorField) -> Result<f64> {
    Ok(stationary_defect(op, nl, omega, u)?.l2_norm())
}

fn stationary_defect(op: &DiracOperator, nl: &Nonlinearity, omega: f64, u: &SpinorField) -> Result<SpinorField> {
    let mut r = op.apply(u)?;
    r.axpy_in_place(C64::new(-omega, 0.0), u);
    r.axpy_in_place(C64::new(1.0, 0.0), &eval_nonlinearity(nl, u));
    Ok(r)
}

/// One solved point of the branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub a: f64,
    pub omega: f64,
    pub profile: SpinorField,
    pub residual: f64,
    pub iterations: usize,
}

/// The continued family `a ↦ (ω(a), U(a))` with `⟨u₀, U⟩ = a`.
#[derive(Debug, Clone)]
pub struct SolitonBranch {
    pub nonlinearity: Nonlinearity,
    pub operator: DiracOperator,
    pub points: Vec<BranchPoint>,
    pub omega0: f64,
    pub u0: SpinorField,
    /// `⟨u₀, N(u₀)⟩`, the leading coefficient of `ω − ω₀ ≈ a^{2p}⟨u₀, N(u₀)⟩`.
    pub projection: f64,
}

/// `U`, `∂ωU`, `∂²ωU` at one frequency, interpolated along the branch.
#[derive(Debug, Clone)]
pub struct ProfileJet {
    pub omega: f64,
    pub u: SpinorField,
    pub du: SpinorField,
    pub d2u: SpinorField,
}

/// Value, first and second derivative weights of the Lagrange interpolant
/// through `nodes` at `t`.
pub fn lagrange_weights(nodes: &[f64], t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = nodes.len();
    let mut w0 = vec![0.0; m];
    let mut w1 = vec![0.0; m];
    let mut w2 = vec![0.0; m];
    for j in 0..m {
        let denom: f64 = (0..m).filter(|&i| i != j).map(|i| nodes[j] - nodes[i]).product();
        let others: Vec<usize> = (0..m).filter(|&i| i != j).collect();
        w0[j] = others.iter().map(|&i| t - nodes[i]).product::<f64>() / denom;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for &k in &others {
            d1 += others.iter().filter(|&&i| i != k).map(|&i| t - nodes[i]).product::<f64>();
            for &l in &others {
                if l != k {
                    d2 += others.iter().filter(|&&i| i != k && i != l).map(|&i| t - nodes[i]).product::<f64>();
                }
            }
        }
        w1[j] = d1 / denom;
        w2[j] = d2 / denom;
    }
    (w0, w1, w2)
}

impl SolitonBranch {
    /// Branch points sorted by ω.
    fn sorted(&self) -> Vec<&BranchPoint> {
        let mut p: Vec<&BranchPoint> = self.points.iter().collect();
        p.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        p
    }

    pub fn omega_range(&self) -> (f64, f64) {
        let p = self.sorted();
        (p.first().map_or(f64::NAN, |q| q.omega), p.last().map_or(f64::NAN, |q| q.omega))
    }

    /// Lagrange interpolation over the `stencil` branch points nearest to `omega`.
    pub fn jet_with(&self, omega: f64, stencil: usize) -> Result<ProfileJet> {
        let p = self.sorted();
        let (lo, hi) = self.omega_range();
        if p.len() < 3 || !(omega >= lo && omega <= hi) {
            return Err(DglError::InvalidArgument(format!("omega = {omega} is outside the branch range [{lo}, {hi}]")));
        }
        let m = stencil.clamp(3, p.len());
        // window of m consecutive points minimising the distance to omega
        let mut start = 0;
        let mut best = f64::INFINITY;
        for s in 0..=p.len() - m {
            let c = 0.5 * (p[s].omega + p[s + m - 1].omega);
            let spread = (p[s + m - 1].omega - p[s].omega).max(1e-300);
            let score = (omega - c).abs() / spread;
            if score < best {
                best = score;
                start = s;
            }
        }
        Ok(Self::combine(&p[start..start + m], omega))
    }

    fn combine(sel: &[&BranchPoint], omega: f64) -> ProfileJet {
        let nodes: Vec<f64> = sel.iter().map(|q| q.omega).collect();
        let (w0, w1, w2) = lagrange_weights(&nodes, omega);
        let grid = sel[0].profile.grid;
        let mut u = SpinorField::zeros(grid);
        let mut du = SpinorField::zeros(grid);
        let mut d2u = SpinorField::zeros(grid);
        for (j, q) in sel.iter().enumerate() {
            u.axpy_in_place(C64::new(w0[j], 0.0), &q.profile);
            du.axpy_in_place(C64::new(w1[j], 0.0), &q.profile);
            d2u.axpy_in_place(C64::new(w2[j], 0.0), &q.profile);
        }
        ProfileJet { omega, u, du, d2u }
    }

    /// Four-point (cubic) interpolation along the branch.
    pub fn jet(&self, omega: f64) -> Result<ProfileJet> {
        self.jet_with(omega, 4)
    }

    /// The branch zero-padded onto `op`, which must share the spacing of the
    /// original grid and contain it (e.g. from `evolve::extend_operator`).
    /// Profiles are not re-solved; the residual grows by the boundary tails.
    pub fn embed(&self, op: &DiracOperator) -> Result<SolitonBranch> {
        let grid = *op.grid();
        let points =
            self.points.iter().map(|p| Ok(BranchPoint { profile: p.profile.embed(grid)?, ..p.clone() })).collect::<Result<Vec<_>>>()?;
        Ok(SolitonBranch {
            nonlinearity: self.nonlinearity.clone(),
            operator: op.clone(),
            points,
            omega0: self.omega0,
            u0: op.bound_state()?.u0.clone(),
            projection: self.projection,
        })
    }

    /// Maximum `|U − conj(V)|` over the branch.
    pub fn symmetry_defect(&self) -> f64 {
        self.points.iter().flat_map(|p| p.profile.u.iter().zip(&p.profile.v).map(|(a, b)| (a - b.conj()).norm())).fold(0.0, f64::max)
    }
}

/// `∂ωU` and `d/dω ‖U‖²` at `omega`.
///
/// At an interior branch point this is the centred three-point difference
/// (non-uniform spacing); elsewhere the cubic interpolant is differentiated.
pub fn branch_derivatives(branch: &SolitonBranch, omega: f64) -> Result<(SpinorField, f64)> {
    let p = branch.sorted();
    let (lo, hi) = branch.omega_range();
    if p.len() < 3 || !(omega > lo && omega < hi) {
        return Err(DglError::InvalidArgument(format!("omega = {omega} is not interior to the branch range [{lo}, {hi}]")));
    }
    let at_node = p.iter().position(|q| (q.omega - omega).abs() <= 1e-14 * (1.0 + omega.abs()));
    let jet = match at_node {
        Some(i) if i > 0 && i + 1 < p.len() => SolitonBranch::combine(&p[i - 1..=i + 1], p[i].omega),
        _ => branch.jet(omega)?,
    };
    let dn = 2.0 * inner_product(&jet.u, &jet.du)?.re;
    Ok((jet.du, dn))
}

/// Newton continuation of the branch through the amplitudes `a_values`.
///
/// Unknowns are `Re ψ`, `Im ψ` and `ω` with `U = (ψ, ψ̄)`; the equations are
/// the first component of the stationary equation and `⟨u₀, U⟩ = a`.  The
/// Jacobian is assembled densely with the spectral derivative matrix.
pub fn continue_branch(op: &DiracOperator, nl: &Nonlinearity, a_values: &[f64]) -> Result<SolitonBranch> {
    continue_branch_with(op, nl, a_values, NEWTON_TOL)
}

pub fn continue_branch_with(op: &DiracOperator, nl: &Nonlinearity, a_values: &[f64], tol: f64) -> Result<SolitonBranch> {
    if a_values.is_empty() {
        return Err(DglError::InvalidArgument("a_values is empty".into()));
    }
    if a_values.iter().any(|a| !(*a > 0.0 && a.is_finite())) || a_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DglError::InvalidArgument("a_values must be positive and strictly increasing".into()));
    }
    if nl.is_none() {
        return Err(DglError::InvalidArgument("continuation needs a nonlinearity".into()));
    }
    let bound = op.bound_state()?.clone();
    let grid = *op.grid();
    let n = grid.n_points();
    let u0 = bound.u0.clone();
    let projection = inner_product(&u0, &eval_nonlinearity(nl, &u0))?.re;
    if projection == 0.0 {
        return Err(DglError::InvalidArgument("<u0, N(u0)> vanishes; no bifurcation".into()));
    }
    let p2 = 2 * nl.degree_p() as i32;
    let d = op.derivative().matrix(n);
    let phi = u0.u.clone();

    let mut points: Vec<BranchPoint> = Vec::with_capacity(a_values.len());
    for &a in a_values {
        let (mut psi, mut omega) = match points.last() {
            None => (phi.iter().map(|z| z * a).collect::<Vec<C64>>(), bound.omega + a.powi(p2) * projection),
            Some(prev) => {
                let r = a / prev.a;
                let psi: Vec<C64> = phi.iter().zip(&prev.profile.u).map(|(f, q)| f * a + (q - f * prev.a) * r.powi(p2 + 1)).collect();
                (psi, bound.omega + (prev.omega - bound.omega) * r.powi(p2))
            }
        };
        let mut iterations = 0;
        let mut residual;
        loop {
            let field = SpinorField { grid, u: psi.clone(), v: psi.iter().map(|z| z.conj()).collect() };
            let defect = stationary_defect(op, nl, omega, &field)?;
            let constraint = inner_product(&u0, &field)?.re - a;
            residual = defect.l2_norm();
            if !residual.is_finite() {
                return Err(DglError::Newton { a, iterations, residual });
            }
            if iterations > 0 && residual < tol && (residual < 1e-3 * tol || iterations >= 3) && constraint.abs() < tol {
                break;
            }
            if iterations >= NEWTON_MAX_ITER {
                return Err(DglError::Newton { a, iterations, residual });
            }
            // Jacobian
            let dim = 2 * n + 1;
            let mut jac = vec![0.0; dim * dim];
            for j in 0..n {
                let row_re = j * dim;
                let row_im = (n + j) * dim;
                for l in 0..n {
                    let djl = d[j * n + l];
                    jac[row_re + n + l] += djl;
                    jac[row_im + l] -= djl;
                }
                let (h11, h12) = nl.hessian_point(psi[j], psi[j].conj());
                let c = C64::new(op.potential().beta[j] - omega, 0.0) + h11[0][0] + h12[0][1];
                let dd = C64::new(op.potential().gamma[j] - 1.0, 0.0) + h11[0][1] + h12[0][0];
                jac[row_re + j] += c.re + dd.re;
                jac[row_re + n + j] += -c.im + dd.im;
                jac[row_im + j] += c.im + dd.im;
                jac[row_im + n + j] += c.re - dd.re;
                jac[row_re + 2 * n] = -psi[j].re;
                jac[row_im + 2 * n] = -psi[j].im;
                let last = 2 * n * dim;
                jac[last + j] = 2.0 * grid.dx() * phi[j].re;
                jac[last + n + j] = 2.0 * grid.dx() * phi[j].im;
            }
            let mut rhs = vec![0.0; dim];
            for j in 0..n {
                rhs[j] = -defect.u[j].re;
                rhs[n + j] = -defect.u[j].im;
            }
            rhs[2 * n] = -constraint;
            let delta = RealLu::new(dim, &jac).solve(&rhs).map_err(|_| DglError::Newton { a, iterations, residual })?;
            for j in 0..n {
                psi[j] += C64::new(delta[j], delta[n + j]);
            }
            omega += delta[2 * n];
            iterations += 1;
        }
        let shift = omega - bound.omega;
        if shift * projection <= 0.0 {
            return Err(DglError::BranchDirection { shift, projection });
        }
        let profile = SpinorField { grid, v: psi.iter().map(|z| z.conj()).collect(), u: psi };
        points.push(BranchPoint { a, omega, profile, residual, iterations });
    }
    Ok(SolitonBranch { nonlinearity: nl.clone(), operator: op.clone(), points, omega0: bound.omega, u0, projection })
}

/// A short branch centred on amplitude `a_center` (points `a_c(1 + j·rel_step)`,
/// `|j| ≤ half_count`) for smooth interpolation of `U(ω)` during evolution.
pub fn local_branch(op: &DiracOperator, nl: &Nonlinearity, a_center: f64, rel_step: f64, half_count: usize) -> Result<SolitonBranch> {
    let a: Vec<f64> = (-(half_count as i64)..=half_count as i64).map(|j| a_center * (1.0 + j as f64 * rel_step)).collect();
    continue_branch(op, nl, &a)
}

/// `‖U − a·u₀‖_{H¹}` of a branch point.
pub fn correction_h1(branch: &SolitonBranch, point: &BranchPoint) -> f64 {
    let diff = point.profile.axpy(C64::new(-point.a, 0.0), &branch.u0);
    let d = diff.derivative(branch.operator.stencil());
    (diff.charge() + d.charge()).sqrt()
}
