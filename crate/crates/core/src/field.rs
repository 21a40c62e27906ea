//! Two-component complex fields on a grid, inner products and weighted norms.

use crate::error::{DglError, Result};
use crate::grid::Grid;
use crate::spectral::{Derivative, Stencil};
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Complex spinor `[u, v]` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: Grid,
    pub u: Vec<C64>,
    pub v: Vec<C64>,
}

impl SpinorField {
    pub fn new(grid: Grid, u: Vec<C64>, v: Vec<C64>) -> Result<Self> {
        let n = grid.n_points();
        if u.len() != n || v.len() != n {
            return Err(DglError::Dimension(format!("spinor components have lengths {} and {}, grid has {n} nodes", u.len(), v.len())));
        }
        if u.iter().chain(&v).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(DglError::NonFinite("SpinorField".into()));
        }
        Ok(Self { grid, u, v })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.n_points();
        Self { grid, u: vec![ZERO; n], v: vec![ZERO; n] }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> (C64, C64)) -> Self {
        let (u, v) = grid.nodes().into_iter().map(&mut f).unzip();
        Self { grid, u, v }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn check_same_grid(&self, other: &SpinorField) -> Result<()> {
        if self.grid != other.grid || self.len() != other.len() {
            return Err(DglError::Dimension("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|u, v| (u * c, v * c))
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.map(|u, v| (u * c, v * c))
    }

    pub fn conj(&self) -> Self {
        self.map(|u, v| (u.conj(), v.conj()))
    }

    /// Componentwise swap `[u, v] -> [v, u]`.
    pub fn swapped(&self) -> Self {
        Self { grid: self.grid, u: self.v.clone(), v: self.u.clone() }
    }

    pub fn map(&self, mut f: impl FnMut(C64, C64) -> (C64, C64)) -> Self {
        let (u, v) = self.u.iter().zip(&self.v).map(|(&a, &b)| f(a, b)).unzip();
        Self { grid: self.grid, u, v }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: C64, other: &SpinorField) -> Self {
        let mut out = self.clone();
        out.axpy_in_place(c, other);
        out
    }

    pub fn axpy_in_place(&mut self, c: C64, other: &SpinorField) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.u.iter_mut().zip(&other.u) {
            *a += c * b;
        }
        for (a, b) in self.v.iter_mut().zip(&other.v) {
            *a += c * b;
        }
    }

    pub fn add(&self, other: &SpinorField) -> Self {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &SpinorField) -> Self {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// Pointwise Euclidean modulus `sqrt(|u|² + |v|²)`.
    pub fn modulus(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt()).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.modulus().into_iter().fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        inner_product_unchecked(self, self).re.max(0.0).sqrt()
    }

    /// Charge `∫ (|u|² + |v|²) dx`.
    pub fn charge(&self) -> f64 {
        inner_product_unchecked(self, self).re
    }

    /// Componentwise derivative with the given stencil.
    pub fn derivative(&self, stencil: Stencil) -> Self {
        let d = Derivative::new(&self.grid, stencil);
        Self { grid: self.grid, u: d.apply_vec(&self.u), v: d.apply_vec(&self.v) }
    }

    /// Interleaved real vector `[u_0, v_0, u_1, v_1, ...]` (re/im pairs).
    pub fn to_interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.len());
        for (a, b) in self.u.iter().zip(&self.v) {
            out.extend_from_slice(&[a.re, a.im, b.re, b.im]);
        }
        out
    }

    /// Zero-extends (or crops) onto a grid with the same spacing and centre.
    pub fn embed(&self, target: Grid) -> Result<Self> {
        if (target.dx() - self.grid.dx()).abs() > 1e-12 * self.grid.dx() {
            return Err(DglError::Dimension("embedding requires equal spacing".into()));
        }
        let mut out = SpinorField::zeros(target);
        for i in 0..self.len() {
            let j = target.nearest(self.grid.x(i));
            if (target.x(j) - self.grid.x(i)).abs() < 1e-6 * self.grid.dx() {
                out.u[j] = self.u[i];
                out.v[j] = self.v[i];
            }
        }
        Ok(out)
    }
}

fn inner_product_unchecked(f: &SpinorField, g: &SpinorField) -> C64 {
    let s: C64 = f.u.iter().zip(&g.u).map(|(a, b)| a.conj() * b).chain(f.v.iter().zip(&g.v).map(|(a, b)| a.conj() * b)).sum();
    s * f.grid.dx()
}

/// `⟨f, g⟩ = ∫ (ū g_u + v̄ g_v) dx`, periodic trapezoid rule.
pub fn inner_product(f: &SpinorField, g: &SpinorField) -> Result<C64> {
    f.check_same_grid(g)?;
    Ok(inner_product_unchecked(f, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Linf,
    H1,
}

/// `‖⟨x⟩^α f‖` in the requested norm; `H1` differentiates the weighted field
/// with the spectral derivative.
pub fn weighted_norm(f: &SpinorField, alpha: f64, kind: NormKind) -> f64 {
    weighted_norm_with(f, alpha, kind, Stencil::Spectral)
}

pub fn weighted_norm_with(f: &SpinorField, alpha: f64, kind: NormKind, stencil: Stencil) -> f64 {
    let weighted = if alpha == 0.0 {
        f.clone()
    } else {
        let w: Vec<f64> = f.grid.nodes().iter().map(|x| (1.0 + x * x).powf(0.5 * alpha)).collect();
        let mut g = f.clone();
        for i in 0..g.len() {
            g.u[i] *= w[i];
            g.v[i] *= w[i];
        }
        g
    };
    match kind {
        NormKind::L2 => weighted.l2_norm(),
        NormKind::Linf => weighted.sup_norm(),
        NormKind::H1 => {
            let d = weighted.derivative(stencil);
            (weighted.charge() + d.charge()).max(0.0).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(grid: Grid) -> SpinorField {
        SpinorField::from_fn(grid, |x| (C64::new((-x * x).exp(), 0.3 * x * (-x * x).exp()), C64::new(0.0, (-0.5 * x * x).exp())))
    }

    #[test]
    fn rejects_wrong_lengths_and_nan() {
        let g = Grid::symmetric(5.0, 64).unwrap();
        assert!(SpinorField::new(g, vec![ZERO; 63], vec![ZERO; 64]).is_err());
        let mut u = vec![ZERO; 64];
        u[3] = C64::new(f64::NAN, 0.0);
        assert!(SpinorField::new(g, u, vec![ZERO; 64]).is_err());
    }

    #[test]
    fn inner_product_grid_mismatch() {
        let a = SpinorField::zeros(Grid::symmetric(5.0, 64).unwrap());
        let b = SpinorField::zeros(Grid::symmetric(5.0, 128).unwrap());
        assert!(inner_product(&a, &b).is_err());
    }

    #[test]
    fn l2_consistency() {
        let f = sample(Grid::symmetric(10.0, 256).unwrap());
        let a = weighted_norm(&f, 0.0, NormKind::L2);
        let b = inner_product(&f, &f).unwrap().re.sqrt();
        assert!((a - b).abs() < 1e-14);
        assert_eq!(weighted_norm(&SpinorField::zeros(f.grid), 2.0, NormKind::H1), 0.0);
    }

    #[test]
    fn embed_round_trip() {
        let g = Grid::symmetric(10.0, 128).unwrap();
        let f = sample(g);
        let big = f.embed(g.extended(256).unwrap()).unwrap();
        assert!((big.charge() - f.charge()).abs() < 1e-14);
        let back = big.embed(g).unwrap();
        assert_eq!(back, f);
    }
}
