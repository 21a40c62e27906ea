//! Linearisation around a soliton `U`: the Hessian matrices `V₁₁`, `V₁₂`,
//! the self-adjoint operator `H_ω`, its block diagonalisation into `H±` by
//! the orthogonal matrix `S`, and the gauge Jordan chain.
//!
//! Perturbations are written `[U₁; U₂]` with `U₂` playing the role of `Ū₁`,
//! so
//! `H_ω = diag(H − ω, H̄ − ω) + [[V₁₁, V₁₂], [V̄₁₂, V̄₁₁]]`.

use crate::dirac::{DiracOperator, Window};
use crate::error::{DglError, Result};
use crate::field::SpinorField;
use crate::grid::Grid;
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::nonlinearity::Nonlinearity;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest `|U − V̄|` for which the block form is accepted.
pub const SYMMETRY_TOL: f64 = 1e-6;
/// Eigenvectors whose edge-to-peak ratio exceeds this are box continuum.
const CONTINUUM_RATIO: f64 = 1e-2;
const EDGE_FRACTION: f64 = 0.05;

type M2 = [[C64; 2]; 2];

/// Pointwise `V₁₁ = [∂²W/∂ū_a∂u_b]`, `V₁₂ = [∂²W/∂ū_a∂ū_b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationMatrices {
    pub grid: Grid,
    pub v11: Vec<M2>,
    pub v12: Vec<M2>,
    /// `max |U − V̄|` of the profile the matrices were computed at.
    pub profile_symmetry: f64,
}

pub fn linearization_matrices(nl: &Nonlinearity, u: &SpinorField) -> LinearizationMatrices {
    let (v11, v12) = u.u.iter().zip(&u.v).map(|(&a, &b)| nl.hessian_point(a, b)).unzip();
    let profile_symmetry = u.u.iter().zip(&u.v).map(|(a, b)| (a - b.conj()).norm()).fold(0.0, f64::max);
    LinearizationMatrices { grid: u.grid, v11, v12, profile_symmetry }
}

impl LinearizationMatrices {
    /// `max |V₁₁ − V̄₁₁ᵀ|` and `max |V₁₂ − V₁₂ᵀ|` over the grid.
    pub fn symmetry_defects(&self) -> (f64, f64) {
        let mut h: f64 = 0.0;
        let mut s: f64 = 0.0;
        for (a, b) in self.v11.iter().zip(&self.v12) {
            for i in 0..2 {
                for j in 0..2 {
                    h = h.max((a[i][j] - a[j][i].conj()).norm());
                    s = s.max((b[i][j] - b[j][i]).norm());
                }
            }
        }
        (h, s)
    }

    /// Defect of the relations `W_ūu = W_v̄v`, `W_ūū = W_vv`, `W_uv = W_ūv̄`
    /// that hold on symmetric profiles.
    pub fn profile_relations_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (a, b) in self.v11.iter().zip(&self.v12) {
            // W_vv = conj(W_v̄v̄) = conj(V₁₂[1][1]); W_uv = conj(W_ūv̄) = conj(V₁₂[0][1])
            m = m.max((a[0][0] - a[1][1]).norm());
            m = m.max((b[0][0] - b[1][1].conj()).norm());
            m = m.max((b[0][1].conj() - b[0][1]).norm());
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.v11.iter().chain(&self.v12).flat_map(|m| m.iter().flatten().map(|z| z.norm())).fold(0.0, f64::max)
    }

    /// `V₁₁ h + V₁₂ h̄`.
    pub fn apply(&self, h: &SpinorField) -> SpinorField {
        let mut out = SpinorField::zeros(h.grid);
        for i in 0..h.len() {
            let (a, b) = (&self.v11[i], &self.v12[i]);
            let (x, y) = (h.u[i], h.v[i]);
            out.u[i] = a[0][0] * x + a[0][1] * y + b[0][0] * x.conj() + b[0][1] * y.conj();
            out.v[i] = a[1][0] * x + a[1][1] * y + b[1][0] * x.conj() + b[1][1] * y.conj();
        }
        out
    }
}

/// An `n×n` block `c·∂ₓ + diag(d)` (with `∂ₓ` the operator's derivative matrix).
#[derive(Debug, Clone)]
struct Block {
    dcoef: C64,
    diag: Vec<C64>,
}

impl Block {
    fn zero(n: usize) -> Self {
        Self { dcoef: ZERO, diag: vec![ZERO; n] }
    }

    fn axpy(&mut self, c: f64, other: &Block) {
        self.dcoef += other.dcoef * c;
        for (a, b) in self.diag.iter_mut().zip(&other.diag) {
            *a += b * c;
        }
    }

    fn max_abs(&self, dmax: f64) -> f64 {
        let d = self.diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
        d.max(self.dcoef.norm() * dmax)
    }
}

/// The orthogonal conjugation matrix `S`.
pub fn s_matrix() -> [[f64; 4]; 4] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [[r, 0.0, r, 0.0], [0.0, r, 0.0, -r], [0.0, r, 0.0, r], [r, 0.0, -r, 0.0]]
}

/// `H_ω` as a 4×4 array of blocks, components ordered `[U₁, V₁, U₂, V₂]`.
fn h_omega_blocks(op: &DiracOperator, omega: f64, lm: &LinearizationMatrices) -> Vec<Vec<Block>> {
    let n = op.grid().n_points();
    let (beta, gamma) = (&op.potential().beta, &op.potential().gamma);
    let mut b: Vec<Vec<Block>> = (0..4).map(|_| (0..4).map(|_| Block::zero(n)).collect()).collect();
    // H − ω on [U₁, V₁] and H̄ − ω on [U₂, V₂]
    for (off, s) in [(0usize, 1.0), (2usize, -1.0)] {
        b[off][off].dcoef = -I * s;
        b[off + 1][off + 1].dcoef = I * s;
        for j in 0..n {
            b[off][off].diag[j] = C64::new(beta[j] - omega, 0.0);
            b[off + 1][off + 1].diag[j] = C64::new(beta[j] - omega, 0.0);
            b[off][off + 1].diag[j] = C64::new(gamma[j] - 1.0, 0.0);
            b[off + 1][off].diag[j] = C64::new(gamma[j] - 1.0, 0.0);
        }
    }
    for j in 0..n {
        let (v11, v12) = (&lm.v11[j], &lm.v12[j]);
        for r in 0..2 {
            for c in 0..2 {
                b[r][c].diag[j] += v11[r][c];
                b[r][2 + c].diag[j] += v12[r][c];
                b[2 + r][c].diag[j] += v12[r][c].conj();
                b[2 + r][2 + c].diag[j] += v11[r][c].conj();
            }
        }
    }
    b
}

fn assemble(blocks: &[Vec<Block>], rows: std::ops::Range<usize>, d: &[f64], n: usize) -> CMatrix {
    let m = rows.len();
    let mut out = CMatrix::zeros(m * n);
    for (bi, r) in rows.clone().enumerate() {
        for (bj, c) in rows.clone().enumerate() {
            let blk = &blocks[r][c];
            for j in 0..n {
                if blk.dcoef != ZERO {
                    for l in 0..n {
                        out.add(bi * n + j, bj * n + l, blk.dcoef * d[j * n + l]);
                    }
                }
                out.add(bi * n + j, bj * n + j, blk.diag[j]);
            }
        }
    }
    out
}

/// The diagonal blocks of `S⁻¹H_ωS`.
#[derive(Debug, Clone)]
pub struct BlockOperators {
    pub omega: f64,
    pub grid: Grid,
    pub h_plus: CMatrix,
    pub h_minus: CMatrix,
    /// Max norm of the off-diagonal blocks of `S⁻¹H_ωS`.
    pub block_residual: f64,
    /// Max difference between the conjugated potentials and the closed-form `V±`.
    pub closed_form_defect: f64,
}

/// Closed-form `V±` from the second derivatives of `W`.
fn closed_form_potentials(v11: &M2, v12: &M2, sign: f64) -> M2 {
    let w_ubu = v11[0][0];
    let w_ubv = v11[0][1];
    let w_ubub = v12[0][0];
    let w_ubvb = v12[0][1];
    let w_uu = w_ubub.conj();
    let w_uvb = w_ubv.conj();
    let w_uv = w_ubvb.conj();
    [[w_ubu + w_ubvb * sign, w_ubub + w_ubv * sign], [w_uu + w_uvb * sign, w_ubu + w_uv * sign]]
}

pub fn block_operators(op: &DiracOperator, omega: f64, lm: &LinearizationMatrices) -> Result<BlockOperators> {
    let grid = *op.grid();
    if lm.grid != grid {
        return Err(DglError::Dimension("linearisation and operator grids differ".into()));
    }
    if !omega.is_finite() {
        return Err(DglError::NonFinite("omega".into()));
    }
    if lm.profile_symmetry > SYMMETRY_TOL {
        return Err(DglError::State(format!("profile violates U = conj(V) by {:.3e}; block form does not apply", lm.profile_symmetry)));
    }
    let n = grid.n_points();
    let h = h_omega_blocks(op, omega, lm);
    let s = s_matrix();
    // (SᵀHS)_{ab} = Σ_{cd} S_{ca} H_{cd} S_{db}
    let mut t: Vec<Vec<Block>> = (0..4).map(|_| (0..4).map(|_| Block::zero(n)).collect()).collect();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let w = s[c][a] * s[d][b];
                    if w != 0.0 {
                        t[a][b].axpy(w, &h[c][d]);
                    }
                }
            }
        }
    }
    let dmat = op.derivative().matrix(n);
    let dmax = dmat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut block_residual: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            if (a < 2) != (b < 2) {
                block_residual = block_residual.max(t[a][b].max_abs(dmax));
            }
        }
    }
    let mut closed_form_defect: f64 = 0.0;
    for j in 0..n {
        for (k, sign) in [(0usize, 1.0), (2usize, -1.0)] {
            let vp = closed_form_potentials(&lm.v11[j], &lm.v12[j], sign);
            let beta = op.potential().beta[j] - omega;
            let g = sign * (op.potential().gamma[j] - 1.0);
            let lin = [[beta, g], [g, beta]];
            for r in 0..2 {
                for c in 0..2 {
                    let got = t[k + r][k + c].diag[j] - lin[r][c];
                    closed_form_defect = closed_form_defect.max((got - vp[r][c]).norm());
                }
            }
        }
    }
    Ok(BlockOperators {
        omega,
        grid,
        h_plus: assemble(&t, 0..2, &dmat, n),
        h_minus: assemble(&t, 2..4, &dmat, n),
        block_residual,
        closed_form_defect,
    })
}

impl BlockOperators {
    /// The gap `(−1−ω, 1−ω)` shrunk by `10·dx²` on each side.
    pub fn gap_window(&self) -> Window {
        let m = 10.0 * self.grid.dx() * self.grid.dx();
        Window::new(-1.0 - self.omega + m, 1.0 - self.omega - m)
    }

    /// `H₋ [U; −V]` residual in `L²`.
    pub fn h_minus_kernel_residual(&self, u: &SpinorField) -> Result<f64> {
        let n = self.grid.n_points();
        if u.len() != n {
            return Err(DglError::Dimension("profile length".into()));
        }
        let x: Vec<C64> = u.u.iter().cloned().chain(u.v.iter().map(|z| -z)).collect();
        let y = self.h_minus.matvec(&x);
        Ok((y.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()).sqrt())
    }

    /// Smallest eigenvalue of `H₊` above the gap and largest below it.
    pub fn continuum_edges(&self) -> Result<(f64, f64)> {
        let e = hermitian_eigen(&self.h_plus, false)?;
        let (lo, hi) = (-1.0 - self.omega, 1.0 - self.omega);
        let mid = 0.5 * (lo + hi);
        let w = self.gap_window();
        let below = e.values.iter().cloned().filter(|&v| v < mid && !w.contains(v)).fold(f64::NEG_INFINITY, f64::max);
        let above = e.values.iter().cloned().filter(|&v| v > mid && !w.contains(v)).fold(f64::INFINITY, f64::min);
        Ok((below, above))
    }
}

fn localized_eigs(m: &CMatrix, window: Window, n: usize) -> Result<Vec<f64>> {
    let e = hermitian_eigen(m, true)?;
    let edge = ((EDGE_FRACTION * n as f64).ceil() as usize).max(1);
    let mut out = vec![];
    for (k, &lam) in e.values.iter().enumerate() {
        if !window.contains(lam) {
            continue;
        }
        let v = &e.vectors[k];
        let modulus: Vec<f64> = (0..n).map(|i| (v[i].norm_sqr() + v[n + i].norm_sqr()).sqrt()).collect();
        let peak = modulus.iter().cloned().fold(0.0, f64::max);
        let boundary = modulus[..edge].iter().chain(&modulus[n - edge..]).cloned().fold(0.0, f64::max);
        if boundary <= CONTINUUM_RATIO * peak {
            out.push(lam);
        }
    }
    Ok(out)
}

/// Localised eigenvalues of `H₊` and `H₋` inside `window`.
pub fn linearized_spectrum(blocks: &BlockOperators, window: Window) -> Result<(Vec<f64>, Vec<f64>)> {
    let gap = blocks.gap_window();
    if !(window.lo >= gap.lo && window.hi <= gap.hi && window.lo < window.hi) {
        return Err(DglError::InvalidArgument(format!(
            "window ({}, {}) is not inside the shrunk gap ({}, {})",
            window.lo, window.hi, gap.lo, gap.hi
        )));
    }
    let n = blocks.grid.n_points();
    Ok((localized_eigs(&blocks.h_plus, window, n)?, localized_eigs(&blocks.h_minus, window, n)?))
}

/// `H_ω [f₁; f₂]`, applied matrix-free.
pub fn apply_h_omega(
    op: &DiracOperator,
    omega: f64,
    lm: &LinearizationMatrices,
    f1: &SpinorField,
    f2: &SpinorField,
) -> Result<(SpinorField, SpinorField)> {
    let shift = C64::new(-omega, 0.0);
    // V₁₁f₁ + V₁₂f₂ = V₁₁f₁ + V₁₂ conj(f̄₂), and similarly for the second row
    let mut r1 = op.apply(f1)?.axpy(shift, f1);
    let mut r2 = op.apply(&f2.conj())?.conj().axpy(shift, f2);
    for i in 0..f1.len() {
        let (a, b) = (&lm.v11[i], &lm.v12[i]);
        r1.u[i] += a[0][0] * f1.u[i] + a[0][1] * f1.v[i] + b[0][0] * f2.u[i] + b[0][1] * f2.v[i];
        r1.v[i] += a[1][0] * f1.u[i] + a[1][1] * f1.v[i] + b[1][0] * f2.u[i] + b[1][1] * f2.v[i];
        r2.u[i] += b[0][0].conj() * f1.u[i] + b[0][1].conj() * f1.v[i] + a[0][0].conj() * f2.u[i] + a[0][1].conj() * f2.v[i];
        r2.v[i] += b[1][0].conj() * f1.u[i] + b[1][1].conj() * f1.v[i] + a[1][0].conj() * f2.u[i] + a[1][1].conj() * f2.v[i];
    }
    Ok((r1, r2))
}

/// `L_ω = −iσH_ω`.
pub fn apply_l_omega(
    op: &DiracOperator,
    omega: f64,
    lm: &LinearizationMatrices,
    f1: &SpinorField,
    f2: &SpinorField,
) -> Result<(SpinorField, SpinorField)> {
    let (h1, h2) = apply_h_omega(op, omega, lm, f1, f2)?;
    Ok((h1.scale(-I), h2.scale(I)))
}

fn pair_norm(a: &SpinorField, b: &SpinorField) -> f64 {
    (a.charge() + b.charge()).sqrt()
}

/// `res1 = ‖(H−ω)U + V₁₁U − V₁₂Ū‖`, `res2 = ‖(H−ω)∂ωU + V₁₁∂ωU + V₁₂∂ωŪ − U‖`.
pub fn kernel_identities(
    op: &DiracOperator,
    omega: f64,
    lm: &LinearizationMatrices,
    u: &SpinorField,
    du: &SpinorField,
) -> Result<(f64, f64)> {
    let shift = C64::new(-omega, 0.0);
    let ub = u.conj();
    let mut r1 = op.apply(u)?.axpy(shift, u);
    let mut r2 = op.apply(du)?.axpy(shift, du).sub(u);
    let minus_ub = ub.scale_re(-1.0);
    // V₁₁U − V₁₂Ū = apply(U) with conj part negated
    for i in 0..u.len() {
        let (a, b) = (&lm.v11[i], &lm.v12[i]);
        r1.u[i] += a[0][0] * u.u[i] + a[0][1] * u.v[i] + b[0][0] * minus_ub.u[i] + b[0][1] * minus_ub.v[i];
        r1.v[i] += a[1][0] * u.u[i] + a[1][1] * u.v[i] + b[1][0] * minus_ub.u[i] + b[1][1] * minus_ub.v[i];
    }
    r2 = r2.add(&lm.apply(du));
    Ok((r1.l2_norm(), r2.l2_norm()))
}

/// `(‖L_ω F‖, ‖L_ω G − F‖)` for `F = i[U; −Ū]`, `G = −∂ω[U; Ū]`.
pub fn jordan_chain_residuals(
    op: &DiracOperator,
    omega: f64,
    lm: &LinearizationMatrices,
    u: &SpinorField,
    du: &SpinorField,
) -> Result<(f64, f64)> {
    let f1 = u.scale(I);
    let f2 = u.conj().scale(-I);
    let g1 = du.scale_re(-1.0);
    let g2 = du.conj().scale_re(-1.0);
    let (lf1, lf2) = apply_l_omega(op, omega, lm, &f1, &f2)?;
    let (lg1, lg2) = apply_l_omega(op, omega, lm, &g1, &g2)?;
    Ok((pair_norm(&lf1, &lf2), pair_norm(&lg1.sub(&f1), &lg2.sub(&f2))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialPair;
    use crate::spectral::Stencil;

    fn setup(n: usize) -> DiracOperator {
        let g = Grid::symmetric(20.0, n).unwrap();
        DiracOperator::new(g, PotentialPair::reference(&g), Stencil::Spectral).unwrap()
    }

    #[test]
    fn zero_profile_gives_zero_matrices() {
        let g = Grid::symmetric(10.0, 64).unwrap();
        for nl in [Nonlinearity::bragg(1.0), Nonlinearity::feshbach(0.7)] {
            let lm = linearization_matrices(&nl, &SpinorField::zeros(g));
            assert_eq!(lm.max_abs(), 0.0);
        }
    }

    #[test]
    fn s_is_orthogonal() {
        let s = s_matrix();
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = (0..4).map(|k| s[k][i] * s[k][j]).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_amplitude_blocks_are_shifted_dirac() {
        let op = setup(64);
        let omega = 0.3;
        let lm = linearization_matrices(&Nonlinearity::bragg(1.0), &SpinorField::zeros(*op.grid()));
        let b = block_operators(&op, omega, &lm).unwrap();
        assert!(b.block_residual < 1e-14);
        let h = op.matrix();
        let n = op.grid().n_points();
        for i in 0..2 * n {
            for j in 0..2 * n {
                let shift = if i == j { omega } else { 0.0 };
                let sign = if (i < n) == (j < n) { 1.0 } else { -1.0 };
                assert!((b.h_plus.get(i, j) - (h.get(i, j) - shift)).norm() < 1e-14);
                assert!((b.h_minus.get(i, j) - (h.get(i, j) * sign - shift)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn asymmetric_profile_refused() {
        let op = setup(64);
        let f = SpinorField::from_fn(*op.grid(), |x| (C64::new((-x * x).exp(), 0.0), C64::new(0.0, (-x * x).exp())));
        let lm = linearization_matrices(&Nonlinearity::bragg(1.0), &f);
        assert!(matches!(block_operators(&op, 0.5, &lm), Err(DglError::State(_))));
    }

    #[test]
    fn h_omega_matches_blocks_on_symmetric_data() {
        // For a symmetric profile, H_ω applied to S[y; 0] equals S[H₊y; 0].
        let op = setup(64);
        let g = *op.grid();
        let prof = SpinorField::from_fn(g, |x| {
            let z = C64::new(0.3 / x.cosh(), 0.1 * x.tanh() / x.cosh());
            (z, z.conj())
        });
        let nl = Nonlinearity::general_quartic([0.4, 1.1, -0.3, 0.2]);
        let lm = linearization_matrices(&nl, &prof);
        let b = block_operators(&op, 0.4, &lm).unwrap();
        assert!(b.block_residual < 1e-13, "{}", b.block_residual);
        assert!(b.closed_form_defect < 1e-13, "{}", b.closed_form_defect);
        let n = g.n_points();
        let y: Vec<C64> = (0..2 * n).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let f1 = SpinorField { grid: g, u: y[..n].iter().map(|z| z * r).collect(), v: y[n..].iter().map(|z| z * r).collect() };
        let f2 = SpinorField { grid: g, u: y[n..].iter().map(|z| z * r).collect(), v: y[..n].iter().map(|z| z * r).collect() };
        let (h1, h2) = apply_h_omega(&op, 0.4, &lm, &f1, &f2).unwrap();
        let hy = b.h_plus.matvec(&y);
        for i in 0..n {
            assert!((h1.u[i] - hy[i] * r).norm() < 1e-12);
            assert!((h1.v[i] - hy[n + i] * r).norm() < 1e-12);
            assert!((h2.u[i] - hy[n + i] * r).norm() < 1e-12);
            assert!((h2.v[i] - hy[i] * r).norm() < 1e-12);
        }
    }

    #[test]
    fn window_must_be_inside_gap() {
        let op = setup(64);
        let lm = linearization_matrices(&Nonlinearity::bragg(1.0), &SpinorField::zeros(*op.grid()));
        let b = block_operators(&op, 0.5, &lm).unwrap();
        assert!(linearized_spectrum(&b, Window::new(-0.5, 0.6)).is_err());
    }
}
