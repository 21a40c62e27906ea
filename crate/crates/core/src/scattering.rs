//! Jost solutions, scattering coefficients, Wronskians and the limiting
//! resolvent kernel on the lower continuous branch `λ = −√(1+k²)`.
//!
//! Jost functions are `u^±(x;k) = m^±(x;k) e^{±ikx}` with `m^± → [1, α±]` at
//! `x → ±∞`, `α± = √(1+k²) ± k`.  The profiles are obtained by integrating
//! the first-order system equivalent to the Volterra equation inward from the
//! side's own boundary; the Volterra equation itself is kept as a residual
//! check ([`volterra_residual`]).

use crate::dirac::DiracOperator;
use crate::error::{DglError, Result};
use crate::field::SpinorField;
use crate::ode::{integrate, Tolerances};
use crate::parallel::map_ordered;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest admissible `|k|`.
pub const K_MAX: f64 = 20.0;
/// Default `|γ⁺|` below which the lower edge is treated as resonant.
pub const RESONANCE_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Which half of the continuous spectrum the Jost function belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `λ = −√(1+k²)`, boundary data `[1, α±]`.
    Lower,
    /// `λ = +√(1+k²)`, boundary data `[−α±, 1]`.
    Upper,
}

pub fn alpha(k: f64, side: Side) -> f64 {
    (1.0 + k * k).sqrt() + side.sign() * k
}

/// A Jost profile `m^±(·;k)` on the operator's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JostSolution {
    pub k: f64,
    pub side: Side,
    pub branch: Branch,
    pub m: SpinorField,
    pub alpha_side: f64,
}

impl JostSolution {
    /// `λ` of the solution.
    pub fn lambda(&self) -> f64 {
        let s = (1.0 + self.k * self.k).sqrt();
        match self.branch {
            Branch::Lower => -s,
            Branch::Upper => s,
        }
    }

    /// The asymptotic value the profile approaches at its own infinity.
    pub fn asymptote(&self) -> [C64; 2] {
        match self.branch {
            Branch::Lower => [C64::new(1.0, 0.0), C64::new(self.alpha_side, 0.0)],
            Branch::Upper => [C64::new(-self.alpha_side, 0.0), C64::new(1.0, 0.0)],
        }
    }

    /// `|m(boundary) − asymptote|` at the side's own end of the grid.
    pub fn boundary_error(&self) -> f64 {
        let i = match self.side {
            Side::Plus => self.m.len() - 1,
            Side::Minus => 0,
        };
        let a = self.asymptote();
        ((self.m.u[i] - a[0]).norm_sqr() + (self.m.v[i] - a[1]).norm_sqr()).sqrt()
    }

    /// `u^±(x) = m^±(x) e^{±ikx}`.
    pub fn u(&self) -> SpinorField {
        let s = self.side.sign() * self.k;
        let xs = self.m.grid.nodes();
        let mut out = self.m.clone();
        for (i, x) in xs.iter().enumerate() {
            let e = C64::from_polar(1.0, s * x);
            out.u[i] *= e;
            out.v[i] *= e;
        }
        out
    }
}

fn check_k(k: f64) -> Result<()> {
    if !k.is_finite() || k.abs() > K_MAX {
        return Err(DglError::InvalidArgument(format!("|k| = {} exceeds k_max = {K_MAX}", k.abs())));
    }
    Ok(())
}

/// Right-hand side of the profile equation at spectral parameter `lambda`.
fn profile_rhs(op: &DiracOperator, lambda: f64, ks: f64) -> impl Fn(f64, &[C64; 2]) -> [C64; 2] + '_ {
    move |x, m| {
        let (b, g) = op.potential().eval(x);
        let lb = lambda - b;
        let gm = g - 1.0;
        [I * (m[0] * lb - m[1] * gm) - I * ks * m[0], -I * (m[1] * lb - m[0] * gm) - I * ks * m[1]]
    }
}

fn solve_profile(op: &DiracOperator, k: f64, side: Side, branch: Branch) -> Result<JostSolution> {
    check_k(k)?;
    let grid = *op.grid();
    let n = grid.n_points();
    let a = alpha(k, side);
    let s = (1.0 + k * k).sqrt();
    let (lambda, start) = match branch {
        Branch::Lower => (-s, [C64::new(1.0, 0.0), C64::new(a, 0.0)]),
        Branch::Upper => (s, [C64::new(-a, 0.0), C64::new(1.0, 0.0)]),
    };
    let ks = side.sign() * k;
    let (x0, order): (f64, Vec<usize>) = match side {
        Side::Plus => (grid.x_max(), (0..n - 1).rev().collect()),
        Side::Minus => (grid.x_min(), (1..n).collect()),
    };
    let outputs: Vec<f64> = order.iter().map(|&i| grid.x(i)).collect();
    let vals = integrate(profile_rhs(op, lambda, ks), x0, start, &outputs, Tolerances::default())
        .map_err(|e| DglError::Integrator { k, msg: e.0 })?;
    let mut m = SpinorField::zeros(grid);
    let first = match side {
        Side::Plus => n - 1,
        Side::Minus => 0,
    };
    m.u[first] = start[0];
    m.v[first] = start[1];
    for (&i, y) in order.iter().zip(&vals) {
        m.u[i] = y[0];
        m.v[i] = y[1];
    }
    Ok(JostSolution { k, side, branch, m, alpha_side: a })
}

/// Lower-branch Jost profile `m^±(·;k)`.
pub fn solve_jost(op: &DiracOperator, k: f64, side: Side) -> Result<JostSolution> {
    solve_profile(op, k, side, Branch::Lower)
}

/// How [`upper_branch_jost`] obtains the upper-branch profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpperRoute {
    /// `[[0, −1], [1, 0]]·m` of the lower-branch profile; requires `β ≡ 0`.
    Symmetry,
    /// Direct integration with boundary data `[−α±, 1]`.
    Direct,
}

/// Upper-branch Jost profile, by symmetry (`β ≡ 0` only) or by direct solve.
pub fn upper_branch_jost(op: &DiracOperator, k: f64, side: Side, route: UpperRoute) -> Result<JostSolution> {
    match route {
        UpperRoute::Direct => solve_profile(op, k, side, Branch::Upper),
        UpperRoute::Symmetry => {
            if !op.potential().beta_vanishes() {
                return Err(DglError::InvalidArgument("the symmetry route requires beta = 0".into()));
            }
            let low = solve_jost(op, k, side)?;
            let m = low.m.map(|a, b| (-b, a));
            Ok(JostSolution { m, branch: Branch::Upper, ..low })
        }
    }
}

/// Volterra kernel `G^±(x;k)` (with `G^±(x;0) = ±[[x+i, x], [x, x−i]]`).
pub fn volterra_kernel(x: f64, k: f64, side: Side) -> [[C64; 2]; 2] {
    let sg = side.sign();
    if k == 0.0 {
        let (a, b) = (C64::new(x, 1.0) * sg, C64::new(x, 0.0) * sg);
        return [[a, b], [b, C64::new(x, -1.0) * sg]];
    }
    let a_s = alpha(k, side);
    let a_o = alpha(k, if side == Side::Plus { Side::Minus } else { Side::Plus });
    let e = C64::from_polar(1.0, -sg * 2.0 * k * x);
    let c = C64::new(0.0, 2.0 * k).inv();
    let one = C64::new(1.0, 0.0);
    [[(e * -a_s + a_o) * c, (one - e) * c], [(one - e) * c, (e * -a_o + a_s) * c]]
}

/// Max over the sampled nodes of `|m(x) − m∞ − ∫ G(x−y)V(y)m(y)dy|`.
///
/// The profile is re-integrated to three Gauss–Legendre points per grid
/// interval so the quadrature is accurate to well below the integrator
/// tolerance.  On the minus side the integral runs over `(−∞, x)`.
pub fn volterra_residual(op: &DiracOperator, k: f64, side: Side, sample_nodes: &[usize]) -> Result<f64> {
    check_k(k)?;
    let grid = *op.grid();
    let n = grid.n_points();
    let h = grid.dx();
    let gl = [(-(0.6f64).sqrt(), 5.0 / 9.0), (0.0, 8.0 / 9.0), ((0.6f64).sqrt(), 5.0 / 9.0)];
    // all abscissae in integration order: nodes and interval Gauss points
    let mut pts: Vec<(f64, f64)> = vec![]; // (x, weight); weight 0 marks a node
    let ivals: Vec<usize> = match side {
        Side::Plus => (0..n - 1).rev().collect(),
        Side::Minus => (0..n - 1).collect(),
    };
    for &i in &ivals {
        let (xl, xr) = (grid.x(i), grid.x(i + 1));
        let mid = 0.5 * (xl + xr);
        let mut g: Vec<(f64, f64)> = gl.iter().map(|(t, w)| (mid + 0.5 * h * t, 0.5 * h * w)).collect();
        if side == Side::Plus {
            g.reverse();
            pts.extend(g);
            pts.push((xl, 0.0));
        } else {
            pts.extend(g);
            pts.push((xr, 0.0));
        }
    }
    let a = alpha(k, side);
    let lambda = -(1.0 + k * k).sqrt();
    let start = [C64::new(1.0, 0.0), C64::new(a, 0.0)];
    let x0 = match side {
        Side::Plus => grid.x_max(),
        Side::Minus => grid.x_min(),
    };
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let vals = integrate(profile_rhs(op, lambda, side.sign() * k), x0, start, &xs, Tolerances::default())
        .map_err(|e| DglError::Integrator { k, msg: e.0 })?;
    let quad: Vec<(f64, f64, [C64; 2])> = pts
        .iter()
        .zip(&vals)
        .filter(|(p, _)| p.1 > 0.0)
        .map(|(p, m)| {
            let (b, g) = op.potential().eval(p.0);
            (p.0, p.1, [m[0] * b + m[1] * g, m[0] * g + m[1] * b])
        })
        .collect();
    let node_val = |i: usize| -> [C64; 2] {
        if (side == Side::Plus && i == n - 1) || (side == Side::Minus && i == 0) {
            return start;
        }
        let target = grid.x(i);
        let j = pts.iter().position(|p| p.1 == 0.0 && (p.0 - target).abs() < 1e-9 * h).unwrap();
        vals[j]
    };
    let mut worst: f64 = 0.0;
    for &i in sample_nodes {
        let x = grid.x(i);
        let mut acc = [ZERO; 2];
        for (y, w, vm) in &quad {
            let inside = match side {
                Side::Plus => *y > x,
                Side::Minus => *y < x,
            };
            if !inside {
                continue;
            }
            let g = volterra_kernel(x - y, k, side);
            acc[0] += (g[0][0] * vm[0] + g[0][1] * vm[1]) * *w;
            acc[1] += (g[1][0] * vm[0] + g[1][1] * vm[1]) * *w;
        }
        // plus: ∫_x^∞ ; minus: ∫_{−∞}^x
        let m = node_val(i);
        let r0 = m[0] - start[0] - acc[0];
        let r1 = m[1] - start[1] - acc[1];
        worst = worst.max((r0.norm_sqr() + r1.norm_sqr()).sqrt());
    }
    Ok(worst)
}

fn vm(op: &DiracOperator, m: &SpinorField, i: usize) -> (C64, C64) {
    let b = op.potential().beta[i];
    let g = op.potential().gamma[i];
    (m.u[i] * b + m.v[i] * g, m.u[i] * g + m.v[i] * b)
}

/// `a^±(k)`, `b^±(k)` at one `k ≠ 0` from solved profiles.
fn coefficients_at(op: &DiracOperator, k: f64) -> Result<[C64; 4]> {
    let mp = solve_jost(op, k, Side::Plus)?;
    let mm = solve_jost(op, k, Side::Minus)?;
    Ok(coefficients_from(op, &mp, &mm))
}

fn coefficients_from(op: &DiracOperator, mp: &JostSolution, mm: &JostSolution) -> [C64; 4] {
    let k = mp.k;
    let grid = op.grid();
    let (ap, am) = (alpha(k, Side::Plus), alpha(k, Side::Minus));
    let mut s = [ZERO; 4];
    for i in 0..grid.n_points() {
        let x = grid.x(i);
        let (p1, p2) = vm(op, &mp.m, i);
        let (q1, q2) = vm(op, &mm.m, i);
        let e = C64::from_polar(1.0, 2.0 * k * x);
        s[0] += p1 * am + p2;
        s[1] += (p1 * ap + p2) * e;
        s[2] += q1 * ap + q2;
        s[3] += (q1 * am + q2) * e.conj();
    }
    let c = C64::new(0.0, 2.0 * k).inv() * grid.dx();
    [C64::new(1.0, 0.0) + s[0] * c, -s[1] * c, C64::new(1.0, 0.0) + s[2] * c, -s[3] * c]
}

/// `a^±`, `b^±` over a k-grid with the residuals of the scattering relations.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringCoefficients {
    pub k_grid: Vec<f64>,
    pub a_plus: Vec<C64>,
    pub b_plus: Vec<C64>,
    pub a_minus: Vec<C64>,
    pub b_minus: Vec<C64>,
    /// `max(|a⁺(k) − a⁻(k)|, |b⁺(k) + b⁻(−k)|)`.
    pub rel1: Vec<f64>,
    /// `|a⁺(−k) − conj a⁺(k)|`.
    pub rel2: Vec<f64>,
    /// `| |a⁺|² − (α₋/α₊)|b⁺|² − 1 |`.
    pub rel3: Vec<f64>,
}

impl ScatteringCoefficients {
    pub fn max_residual(&self) -> f64 {
        self.rel1.iter().chain(&self.rel2).chain(&self.rel3).cloned().fold(0.0, f64::max)
    }

    pub fn min_abs_a_plus(&self) -> f64 {
        self.a_plus.iter().map(|a| a.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates the scattering data on `k_grid` (which must avoid `k = 0`);
/// the sweep runs in parallel and is reduced in index order.
pub fn scattering_coefficients(op: &DiracOperator, k_grid: &[f64]) -> Result<ScatteringCoefficients> {
    for &k in k_grid {
        if k == 0.0 || !k.is_finite() {
            return Err(DglError::InvalidArgument("k_grid must not contain 0 (coefficients are singular there)".into()));
        }
        check_k(k)?;
    }
    let rows: Vec<Result<([C64; 4], [C64; 4])>> = map_ordered(k_grid, |&k| Ok((coefficients_at(op, k)?, coefficients_at(op, -k)?)));
    let mut out = ScatteringCoefficients {
        k_grid: k_grid.to_vec(),
        a_plus: vec![],
        b_plus: vec![],
        a_minus: vec![],
        b_minus: vec![],
        rel1: vec![],
        rel2: vec![],
        rel3: vec![],
    };
    for (r, &k) in rows.into_iter().zip(k_grid) {
        let ([ap, bp, am, bm], [ap_neg, _, _, bm_neg]) = r?;
        out.a_plus.push(ap);
        out.b_plus.push(bp);
        out.a_minus.push(am);
        out.b_minus.push(bm);
        out.rel1.push((ap - am).norm().max((bp + bm_neg).norm()));
        out.rel2.push((ap_neg - ap.conj()).norm());
        let ratio = alpha(k, Side::Minus) / alpha(k, Side::Plus);
        out.rel3.push((ap.norm_sqr() - ratio * bp.norm_sqr() - 1.0).abs());
    }
    Ok(out)
}

/// Wronskian `W(x) = u⁺₁u⁻₂ − u⁺₂u⁻₁` of a Jost pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Wronskian {
    pub values: Vec<C64>,
    /// Mean over the interior (outer 10% on each side excluded).
    pub mean: C64,
    /// `max |W − mean| / |mean|` over the interior.
    pub max_rel_deviation: f64,
}

pub fn wronskian(up: &JostSolution, um: &JostSolution) -> Result<Wronskian> {
    if up.side != Side::Plus || um.side != Side::Minus {
        return Err(DglError::InvalidArgument("wronskian expects (plus, minus) solutions".into()));
    }
    if up.k != um.k || up.branch != um.branch {
        return Err(DglError::InvalidArgument("wronskian expects solutions with the same k and branch".into()));
    }
    up.m.check_same_grid(&um.m)?;
    let (p, m) = (up.u(), um.u());
    let values: Vec<C64> = (0..p.len()).map(|i| p.u[i] * m.v[i] - p.v[i] * m.u[i]).collect();
    let n = values.len();
    let lo = n / 10;
    let hi = n - n / 10;
    let mean = values[lo..hi].iter().sum::<C64>() / (hi - lo) as f64;
    let dev = values[lo..hi].iter().map(|w| (w - mean).norm()).fold(0.0, f64::max);
    let scale = mean.norm();
    Ok(Wronskian { values, mean, max_rel_deviation: if scale > 0.0 { dev / scale } else { dev } })
}

/// `γ^± = ∫ (β+γ)(m₁^±(x;0) + m₂^±(x;0)) dx`.
pub fn resonance_indicator(op: &DiracOperator) -> Result<(C64, C64)> {
    let mp = solve_jost(op, 0.0, Side::Plus)?;
    let mm = solve_jost(op, 0.0, Side::Minus)?;
    let pot = op.potential();
    let dx = op.grid().dx();
    let mut gp = ZERO;
    let mut gm = ZERO;
    for i in 0..mp.m.len() {
        let w = pot.beta[i] + pot.gamma[i];
        gp += (mp.m.u[i] + mp.m.v[i]) * w;
        gm += (mm.m.u[i] + mm.m.v[i]) * w;
    }
    Ok((gp * dx, gm * dx))
}

/// Which boundary value of the resolvent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventSign {
    /// Limit from the upper half-plane, `λ + i0`.
    Plus,
    /// Limit from the lower half-plane, `λ − i0`.
    Minus,
}

/// Limiting resolvent `R^±(λ)` at a fixed `λ ≤ −1`, with the Jost pair cached.
#[derive(Debug, Clone)]
pub struct Resolvent {
    pub lambda: f64,
    pub k: f64,
    up: SpinorField,
    um: SpinorField,
    /// `2ik a⁺(k)`, equal to `−i W`.
    denominator: C64,
}

impl Resolvent {
    pub fn new(op: &DiracOperator, lambda: f64) -> Result<Self> {
        Self::with_threshold(op, lambda, RESONANCE_THRESHOLD)
    }

    pub fn with_threshold(op: &DiracOperator, lambda: f64, threshold: f64) -> Result<Self> {
        if !(lambda <= -1.0) {
            return Err(DglError::InvalidArgument(format!("lambda = {lambda} must be <= -1")));
        }
        let (gp, _) = resonance_indicator(op)?;
        if gp.norm() < threshold {
            return Err(DglError::Resonance { gamma: gp.norm(), threshold });
        }
        let k = -(lambda * lambda - 1.0).max(0.0).sqrt();
        let jp = solve_jost(op, k, Side::Plus)?;
        let jm = solve_jost(op, k, Side::Minus)?;
        let w = wronskian(&jp, &jm)?;
        Ok(Self { lambda, k, up: jp.u(), um: jm.u(), denominator: -I * w.mean })
    }

    /// Kernel value at grid nodes `(i, j)`.
    pub fn kernel_nodes(&self, i: usize, j: usize, sign: ResolventSign) -> [[C64; 2]; 2] {
        match sign {
            ResolventSign::Plus => {
                let (a, b) = if i >= j { (&self.up, &self.um) } else { (&self.um, &self.up) };
                let ax = [a.u[i], a.v[i]];
                // σ₁ u(y) = [u₂, u₁]
                let by = [b.v[j], b.u[j]];
                let c = self.denominator.inv();
                [[ax[0] * by[0] * c, ax[0] * by[1] * c], [ax[1] * by[0] * c, ax[1] * by[1] * c]]
            }
            ResolventSign::Minus => {
                let t = self.kernel_nodes(j, i, ResolventSign::Plus);
                [[t[0][0].conj(), t[1][0].conj()], [t[0][1].conj(), t[1][1].conj()]]
            }
        }
    }

    /// Kernel value at `(x, y)`, snapped to the nearest grid nodes.
    pub fn kernel(&self, x: f64, y: f64, sign: ResolventSign) -> [[C64; 2]; 2] {
        let g = self.up.grid;
        self.kernel_nodes(g.nearest(x), g.nearest(y), sign)
    }
}

/// `R^±(λ)(x, y)`; see [`Resolvent`] for repeated evaluation.
pub fn resolvent_kernel(op: &DiracOperator, lambda: f64, sign: ResolventSign, x: f64, y: f64) -> Result<[[C64; 2]; 2]> {
    let g = op.grid();
    let lo = g.x_min() + 0.1 * (g.x_max() - g.x_min());
    let hi = g.x_max() - 0.1 * (g.x_max() - g.x_min());
    if !(x >= lo && x <= hi && y >= lo && y <= hi) {
        return Err(DglError::InvalidArgument("x and y must be interior points".into()));
    }
    Ok(Resolvent::new(op, lambda)?.kernel(x, y, sign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::potential::PotentialPair;
    use crate::spectral::Stencil;

    fn op(pot: fn(&Grid) -> PotentialPair) -> DiracOperator {
        let g = Grid::symmetric(25.0, 512).unwrap();
        DiracOperator::new(g, pot(&g), Stencil::Spectral).unwrap()
    }

    #[test]
    fn free_profiles_are_constant() {
        let o = op(PotentialPair::zero);
        for k in [-3.0, -0.5, 0.0, 1.0, 4.0] {
            for side in [Side::Plus, Side::Minus] {
                let j = solve_jost(&o, k, side).unwrap();
                let a = alpha(k, side);
                for i in 0..j.m.len() {
                    assert!((j.m.u[i] - 1.0).norm() < 1e-12 && (j.m.v[i] - a).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn k_range_enforced() {
        let o = op(PotentialPair::zero);
        assert!(solve_jost(&o, 25.0, Side::Plus).is_err());
        assert!(scattering_coefficients(&o, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn sample_values_on_reference() {
        let o = op(PotentialPair::reference);
        let c = scattering_coefficients(&o, &[1.0, 0.5]).unwrap();
        assert!((c.a_plus[0] - C64::new(0.437537, 0.924505)).norm() < 2e-6);
        assert!((c.b_plus[0] - C64::new(0.0, -0.518626)).norm() < 2e-6);
        assert!((c.a_plus[1] - C64::new(0.137796, 1.568530)).norm() < 2e-6);
        assert!(c.max_residual() < 1e-10);
    }

    #[test]
    fn kernel_zero_limit() {
        let g0 = volterra_kernel(0.7, 0.0, Side::Plus);
        let g1 = volterra_kernel(0.7, 1e-7, Side::Plus);
        for i in 0..2 {
            for j in 0..2 {
                assert!((g0[i][j] - g1[i][j]).norm() < 1e-5);
            }
        }
    }
}
