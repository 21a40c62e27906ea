//! One time step of `i u_t = H u + N(u)`.
//!
//! Strang splitting `D/2 · V/2 · N · V/2 · D/2`: the free Dirac flow is exact
//! per wavenumber, the potential flow is exact pointwise (`V = β + γσ₁`), and
//! the nonlinear flow is an exact phase rotation when `W` depends on `|u|²`,
//! `|v|²` only, pointwise RK4 otherwise.

use super::{Scheme, BLOW_UP};
use crate::dirac::DiracOperator;
use crate::error::{DglError, Result};
use crate::field::SpinorField;
use crate::nonlinearity::Nonlinearity;
use crate::spectral::FftPair;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// 2×2 complex matrix `[[a, b], [c, d]]`.
type M2 = [C64; 4];

#[derive(Debug, Clone)]
pub struct Propagator {
    op: DiracOperator,
    nl: Nonlinearity,
    dt: f64,
    scheme: Scheme,
    fft: FftPair,
    free_half: Vec<M2>,
    pot_half: Vec<M2>,
}

/// `exp(−i s D_k)` for the symbol `D_k = [[k, −1], [−1, −k]]`.
fn free_symbol(k: f64, s: f64) -> M2 {
    let w = (1.0 + k * k).sqrt();
    let c = C64::new((w * s).cos(), 0.0);
    let sn = -I * ((w * s).sin() / w);
    [c + sn * k, -sn, -sn, c - sn * k]
}

/// `exp(−i s (β + γσ₁))`.
fn potential_symbol(beta: f64, gamma: f64, s: f64) -> M2 {
    let ph = C64::from_polar(1.0, -beta * s);
    let c = ph * (gamma * s).cos();
    let sn = ph * (-I) * (gamma * s).sin();
    [c, sn, sn, c]
}

#[inline]
fn apply_m2(m: &M2, a: C64, b: C64) -> (C64, C64) {
    (m[0] * a + m[1] * b, m[2] * a + m[3] * b)
}

impl Propagator {
    pub fn new(op: &DiracOperator, nl: &Nonlinearity, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(DglError::InvalidArgument(format!("dt must be positive (got {dt})")));
        }
        let grid = op.grid();
        let free_half = grid.wavenumbers().iter().map(|&k| free_symbol(k, 0.5 * dt)).collect();
        let pot = op.potential();
        let pot_half = pot.beta.iter().zip(&pot.gamma).map(|(&b, &g)| potential_symbol(b, g, 0.5 * dt)).collect();
        Ok(Self { op: op.clone(), nl: nl.clone(), dt, scheme, fft: FftPair::new(grid.n_points()), free_half, pot_half })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn operator(&self) -> &DiracOperator {
        &self.op
    }

    fn free_half_step(&self, f: &mut SpinorField) {
        self.fft.forward(&mut f.u);
        self.fft.forward(&mut f.v);
        for (j, m) in self.free_half.iter().enumerate() {
            let (a, b) = apply_m2(m, f.u[j], f.v[j]);
            f.u[j] = a;
            f.v[j] = b;
        }
        self.fft.inverse(&mut f.u);
        self.fft.inverse(&mut f.v);
    }

    fn potential_half_step(&self, f: &mut SpinorField) {
        for (j, m) in self.pot_half.iter().enumerate() {
            let (a, b) = apply_m2(m, f.u[j], f.v[j]);
            f.u[j] = a;
            f.v[j] = b;
        }
    }

    fn nonlinear_step(&self, f: &mut SpinorField) {
        if self.nl.is_none() {
            return;
        }
        let dt = self.dt;
        for j in 0..f.len() {
            let (u, v) = (f.u[j], f.v[j]);
            if let Some((ru, rv)) = self.nl.phase_rates_point(u, v) {
                f.u[j] = u * C64::from_polar(1.0, -ru * dt);
                f.v[j] = v * C64::from_polar(1.0, -rv * dt);
            } else {
                let rhs = |a: C64, b: C64| {
                    let (na, nb) = self.nl.grad_point(a, b);
                    (-I * na, -I * nb)
                };
                let (k1u, k1v) = rhs(u, v);
                let (k2u, k2v) = rhs(u + k1u * (0.5 * dt), v + k1v * (0.5 * dt));
                let (k3u, k3v) = rhs(u + k2u * (0.5 * dt), v + k2v * (0.5 * dt));
                let (k4u, k4v) = rhs(u + k3u * dt, v + k3v * dt);
                f.u[j] = u + (k1u + k2u * 2.0 + k3u * 2.0 + k4u) * (dt / 6.0);
                f.v[j] = v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
            }
        }
    }

    /// `−i (H f + N(f))`.
    fn rhs(&self, f: &SpinorField) -> Result<SpinorField> {
        let mut h = self.op.apply(f)?;
        if !self.nl.is_none() {
            for j in 0..f.len() {
                let (a, b) = self.nl.grad_point(f.u[j], f.v[j]);
                h.u[j] += a;
                h.v[j] += b;
            }
        }
        Ok(h.scale(-I))
    }

    /// Advances `f` in place by one step; `t` is only used in error reports.
    pub fn step(&self, f: &mut SpinorField, t: f64) -> Result<()> {
        if f.grid != *self.op.grid() {
            return Err(DglError::Dimension("field and propagator grids differ".into()));
        }
        match self.scheme {
            Scheme::StrangSplit => {
                self.free_half_step(f);
                self.potential_half_step(f);
                self.nonlinear_step(f);
                self.potential_half_step(f);
                self.free_half_step(f);
            }
            Scheme::Rk4 => {
                let dt = self.dt;
                let k1 = self.rhs(f)?;
                let k2 = self.rhs(&f.axpy(C64::new(0.5 * dt, 0.0), &k1))?;
                let k3 = self.rhs(&f.axpy(C64::new(0.5 * dt, 0.0), &k2))?;
                let k4 = self.rhs(&f.axpy(C64::new(dt, 0.0), &k3))?;
                for j in 0..f.len() {
                    f.u[j] += (k1.u[j] + k2.u[j] * 2.0 + k3.u[j] * 2.0 + k4.u[j]) * (dt / 6.0);
                    f.v[j] += (k1.v[j] + k2.v[j] * 2.0 + k3.v[j] * 2.0 + k4.v[j]) * (dt / 6.0);
                }
            }
        }
        let sup = f.sup_norm();
        if !(sup <= BLOW_UP) {
            return Err(DglError::BlowUp { t: t + self.dt, sup });
        }
        Ok(())
    }
}

/// One split step of `i u_t = H u + N(u)`.
pub fn step_full(f: &SpinorField, op: &DiracOperator, nl: &Nonlinearity, dt: f64) -> Result<SpinorField> {
    let p = Propagator::new(op, nl, dt, Scheme::StrangSplit)?;
    let mut g = f.clone();
    p.step(&mut g, 0.0)?;
    Ok(g)
}
