//! Thin wrappers over faer for the dense problems in this crate.

use faer::complex_native::c64;
use faer::prelude::*;
use faer::{Mat, Side};

use crate::error::{DglError, Result};
use crate::C64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.n + j] = z;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.n + j] += z;
    }

    /// `max |M − M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                m = m.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    fn to_faer(&self) -> Mat<c64> {
        Mat::from_fn(self.n, self.n, |i, j| {
            let z = self.get(i, j);
            c64::new(z.re, z.im)
        })
    }
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and, if
/// requested, column eigenvectors (`vectors[k]` is the k-th eigenvector).
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

pub fn hermitian_eigen(m: &CMatrix, want_vectors: bool) -> Result<HermitianEigen> {
    if m.data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(DglError::Eigen("matrix has non-finite entries".into()));
    }
    let a = m.to_faer();
    if !want_vectors {
        let mut values: Vec<f64> = a.selfadjoint_eigenvalues(Side::Lower);
        values.sort_by(f64::total_cmp);
        return Ok(HermitianEigen { values, vectors: vec![] });
    }
    let eig = a.selfadjoint_eigendecomposition(Side::Lower);
    let s = eig.s().column_vector();
    let u = eig.u();
    let n = m.n;
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for k in 0..n {
        let lam = s.read(k).re;
        if !lam.is_finite() {
            return Err(DglError::Eigen("non-finite eigenvalue".into()));
        }
        values.push(lam);
        vectors.push(
            (0..n)
                .map(|i| {
                    let z = u.read(i, k);
                    C64::new(z.re, z.im)
                })
                .collect(),
        );
    }
    Ok(HermitianEigen { values, vectors })
}

/// LU-factorised real matrix.
pub struct RealLu {
    lu: faer::solvers::PartialPivLu<f64>,
    n: usize,
}

impl RealLu {
    /// Factorises a row-major `n×n` matrix.
    pub fn new(n: usize, data: &[f64]) -> Self {
        let a = Mat::from_fn(n, n, |i, j| data[i * n + j]);
        Self { lu: a.partial_piv_lu(), n }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = Mat::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        let out: Vec<f64> = (0..self.n).map(|i| x.read(i, 0)).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(DglError::Eigen("singular linear system".into()));
        }
        Ok(out)
    }
}

/// Solves a dense complex system `M x = b`.
pub fn complex_solve(m: &CMatrix, rhs: &[C64]) -> Result<Vec<C64>> {
    let a = m.to_faer();
    let b = Mat::from_fn(m.n, 1, |i, _| c64::new(rhs[i].re, rhs[i].im));
    let x = a.partial_piv_lu().solve(&b);
    let out: Vec<C64> = (0..m.n)
        .map(|i| {
            let z = x.read(i, 0);
            C64::new(z.re, z.im)
        })
        .collect();
    if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(DglError::Eigen("singular linear system".into()));
    }
    Ok(out)
}

/// Solves `M X = B` for several right-hand sides with one factorisation.
pub fn complex_solve_many(m: &CMatrix, rhs: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
    let a = m.to_faer();
    let b = Mat::from_fn(m.n, rhs.len(), |i, j| c64::new(rhs[j][i].re, rhs[j][i].im));
    let x = a.partial_piv_lu().solve(&b);
    let out: Vec<Vec<C64>> = (0..rhs.len())
        .map(|j| {
            (0..m.n)
                .map(|i| {
                    let z = x.read(i, j);
                    C64::new(z.re, z.im)
                })
                .collect()
        })
        .collect();
    if out.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(DglError::Eigen("singular linear system".into()));
    }
    Ok(out)
}
