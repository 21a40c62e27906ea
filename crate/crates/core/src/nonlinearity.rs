//! Gauge-invariant polynomial nonlinearities `W(u, v, ū, v̄)` and their
//! Wirtinger derivatives.
//!
//! Every kind is stored as a real-coefficient polynomial in the four
//! independent symbols `u, v, ū, v̄`; gradients `N = (∂ū W, ∂v̄ W)` and the
//! second-derivative matrices `V₁₁`, `V₁₂` are obtained by symbolic
//! differentiation, so all kinds share one code path.

use crate::error::{DglError, Result};
use crate::field::SpinorField;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Symbol indices.
const U: usize = 0;
const V: usize = 1;
const UB: usize = 2;
const VB: usize = 3;

#[derive(Debug, Clone, PartialEq)]
struct Monomial {
    coef: f64,
    exp: [u8; 4],
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Poly {
    terms: Vec<Monomial>,
}

impl Poly {
    fn push(&mut self, coef: f64, exp: [u8; 4]) {
        if coef == 0.0 {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.exp == exp) {
            t.coef += coef;
        } else {
            self.terms.push(Monomial { coef, exp });
        }
        self.terms.retain(|t| t.coef != 0.0);
    }

    fn diff(&self, var: usize) -> Poly {
        let mut out = Poly::default();
        for t in &self.terms {
            if t.exp[var] > 0 {
                let mut e = t.exp;
                e[var] -= 1;
                out.push(t.coef * t.exp[var] as f64, e);
            }
        }
        out
    }

    /// Divides by the symbol `var`; `None` unless every term contains it.
    fn divide(&self, var: usize) -> Option<Poly> {
        let mut out = Poly::default();
        for t in &self.terms {
            if t.exp[var] == 0 {
                return None;
            }
            let mut e = t.exp;
            e[var] -= 1;
            out.push(t.coef, e);
        }
        Some(out)
    }

    fn eval(&self, z: &[C64; 4]) -> C64 {
        let mut pows = [[C64::new(1.0, 0.0); 7]; 4];
        for s in 0..4 {
            for k in 1..7 {
                pows[s][k] = pows[s][k - 1] * z[s];
            }
        }
        let mut acc = ZERO;
        for t in &self.terms {
            let mut m = C64::new(t.coef, 0.0);
            for s in 0..4 {
                m *= pows[s][t.exp[s] as usize];
            }
            acc += m;
        }
        acc
    }

    fn degree(&self) -> Option<u32> {
        let d: Vec<u32> = self.terms.iter().map(|t| t.exp.iter().map(|&e| e as u32).sum()).collect();
        let first = *d.first()?;
        d.iter().all(|&x| x == first).then_some(first)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearityKind {
    BraggQuartic,
    GrossNeveu,
    GeneralQuartic,
    FeshbachSextic,
    None,
}

impl NonlinearityKind {
    pub fn name(&self) -> &'static str {
        match self {
            NonlinearityKind::BraggQuartic => "bragg_quartic",
            NonlinearityKind::GrossNeveu => "gross_neveu",
            NonlinearityKind::GeneralQuartic => "general_quartic",
            NonlinearityKind::FeshbachSextic => "feshbach_sextic",
            NonlinearityKind::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "bragg_quartic" => NonlinearityKind::BraggQuartic,
            "gross_neveu" => NonlinearityKind::GrossNeveu,
            "general_quartic" => NonlinearityKind::GeneralQuartic,
            "feshbach_sextic" => NonlinearityKind::FeshbachSextic,
            "none" => NonlinearityKind::None,
            _ => return None,
        })
    }
}

/// Pointwise second derivatives `(V₁₁, V₁₂)` as row-major 2×2 arrays.
pub type Hessian = ([[C64; 2]; 2], [[C64; 2]; 2]);

/// A catalogued nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    coefficients: Vec<f64>,
    degree_p: u32,
    w: Poly,
    grad: [Poly; 2],
    hess11: [[Poly; 2]; 2],
    hess12: [[Poly; 2]; 2],
    /// `∂ū W / u`, `∂v̄ W / v` when W depends on |u|², |v|² only.
    phase_rates: Option<[Poly; 2]>,
}

fn quartic_poly(a: [f64; 4]) -> Poly {
    let mut w = Poly::default();
    // α₁(|u|⁴ + |v|⁴)
    w.push(a[0], [2, 0, 2, 0]);
    w.push(a[0], [0, 2, 0, 2]);
    // α₂|u|²|v|²
    w.push(a[1], [1, 1, 1, 1]);
    // α₃(ūv + uv̄)² = ū²v² + 2|u|²|v|² + u²v̄²
    w.push(a[2], [0, 2, 2, 0]);
    w.push(2.0 * a[2], [1, 1, 1, 1]);
    w.push(a[2], [2, 0, 0, 2]);
    // α₄(|u|² + |v|²)(ūv + uv̄)
    w.push(a[3], [1, 1, 2, 0]);
    w.push(a[3], [2, 0, 1, 1]);
    w.push(a[3], [0, 2, 1, 1]);
    w.push(a[3], [1, 1, 0, 2]);
    w
}

impl Nonlinearity {
    /// `W = α(|u|⁴ + 4|u|²|v|² + |v|⁴)`.
    pub fn bragg(alpha: f64) -> Self {
        Self::build(NonlinearityKind::BraggQuartic, vec![alpha], quartic_poly([alpha, 4.0 * alpha, 0.0, 0.0]), 1)
    }

    /// `W = α(ūv + uv̄)²`.
    pub fn gross_neveu(alpha: f64) -> Self {
        Self::build(NonlinearityKind::GrossNeveu, vec![alpha], quartic_poly([0.0, 0.0, alpha, 0.0]), 1)
    }

    /// `W = α₁(|u|⁴+|v|⁴) + α₂|u|²|v|² + α₃(ūv+uv̄)² + α₄(|u|²+|v|²)(ūv+uv̄)`.
    pub fn general_quartic(a: [f64; 4]) -> Self {
        Self::build(NonlinearityKind::GeneralQuartic, a.to_vec(), quartic_poly(a), 1)
    }

    /// `W = α(|u|² + |v|²)|u|²|v|²`.
    pub fn feshbach(alpha: f64) -> Self {
        let mut w = Poly::default();
        w.push(alpha, [2, 1, 2, 1]);
        w.push(alpha, [1, 2, 1, 2]);
        Self::build(NonlinearityKind::FeshbachSextic, vec![alpha], w, 2)
    }

    pub fn none() -> Self {
        Self::build(NonlinearityKind::None, vec![], Poly::default(), 1)
    }

    /// Builds a kind from its name and coefficient list, validating the arity.
    pub fn from_kind(kind: NonlinearityKind, coefficients: &[f64]) -> Result<Self> {
        let need = match kind {
            NonlinearityKind::GeneralQuartic => 4,
            NonlinearityKind::None => 0,
            _ => 1,
        };
        if coefficients.len() != need {
            return Err(DglError::InvalidArgument(format!("{} takes {need} coefficient(s), got {}", kind.name(), coefficients.len())));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(DglError::NonFinite("nonlinearity coefficients".into()));
        }
        Ok(match kind {
            NonlinearityKind::BraggQuartic => Self::bragg(coefficients[0]),
            NonlinearityKind::GrossNeveu => Self::gross_neveu(coefficients[0]),
            NonlinearityKind::GeneralQuartic => Self::general_quartic([coefficients[0], coefficients[1], coefficients[2], coefficients[3]]),
            NonlinearityKind::FeshbachSextic => Self::feshbach(coefficients[0]),
            NonlinearityKind::None => Self::none(),
        })
    }

    fn build(kind: NonlinearityKind, coefficients: Vec<f64>, w: Poly, degree_p: u32) -> Self {
        debug_assert!(w.degree().map_or(true, |d| d == 2 * degree_p + 2));
        let grad = [w.diff(UB), w.diff(VB)];
        let hess11 = [[grad[0].diff(U), grad[0].diff(V)], [grad[1].diff(U), grad[1].diff(V)]];
        let hess12 = [[grad[0].diff(UB), grad[0].diff(VB)], [grad[1].diff(UB), grad[1].diff(VB)]];
        let modulus_only = w.terms.iter().all(|t| t.exp[U] == t.exp[UB] && t.exp[V] == t.exp[VB]);
        let phase_rates =
            if modulus_only { Some([grad[0].divide(U).unwrap_or_default(), grad[1].divide(V).unwrap_or_default()]) } else { None };
        Self { kind, coefficients, degree_p, w, grad, hess11, hess12, phase_rates }
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Homogeneity index: `N(aU) = a^(2p+1) N(U)`.
    pub fn degree_p(&self) -> u32 {
        self.degree_p
    }

    pub fn is_none(&self) -> bool {
        self.w.terms.is_empty()
    }

    /// True when W depends on `|u|²` and `|v|²` only, so the nonlinear flow
    /// is a pointwise phase rotation.
    pub fn preserves_moduli(&self) -> bool {
        self.phase_rates.is_some()
    }

    fn symbols(u: C64, v: C64) -> [C64; 4] {
        [u, v, u.conj(), v.conj()]
    }

    pub fn w_point(&self, u: C64, v: C64) -> f64 {
        self.w.eval(&Self::symbols(u, v)).re
    }

    pub fn grad_point(&self, u: C64, v: C64) -> (C64, C64) {
        let z = Self::symbols(u, v);
        (self.grad[0].eval(&z), self.grad[1].eval(&z))
    }

    /// Real rates `(g₁, g₂)` with `N = (g₁u, g₂v)`, for modulus-preserving kinds.
    pub fn phase_rates_point(&self, u: C64, v: C64) -> Option<(f64, f64)> {
        let r = self.phase_rates.as_ref()?;
        let z = Self::symbols(u, v);
        Some((r[0].eval(&z).re, r[1].eval(&z).re))
    }

    pub fn hessian_point(&self, u: C64, v: C64) -> Hessian {
        let z = Self::symbols(u, v);
        let e = |p: &[[Poly; 2]; 2]| [[p[0][0].eval(&z), p[0][1].eval(&z)], [p[1][0].eval(&z), p[1][1].eval(&z)]];
        (e(&self.hess11), e(&self.hess12))
    }
}

/// `N(f)` pointwise.
pub fn eval_nonlinearity(nl: &Nonlinearity, f: &SpinorField) -> SpinorField {
    if nl.is_none() {
        return SpinorField::zeros(f.grid);
    }
    f.map(|u, v| nl.grad_point(u, v))
}

/// `W(f)` pointwise.
pub fn eval_wn(nl: &Nonlinearity, f: &SpinorField) -> Vec<f64> {
    f.u.iter().zip(&f.v).map(|(&u, &v)| nl.w_point(u, v)).collect()
}
