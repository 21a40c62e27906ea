//! Spatial derivatives: periodic finite differences and the Fourier
//! pseudospectral derivative, both as operators and as dense matrices.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;
use crate::C64;

/// Discretisation of `∂x`.
///
/// Collocated central differences have a spurious zero of their symbol at the
/// Nyquist wavenumber, which doubles every gap eigenvalue of an assembled
/// Dirac matrix.  The spectral derivative does not, and is the default for
/// anything that looks at spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    Fd2,
    Fd4,
    #[default]
    Spectral,
}

impl Stencil {
    /// Formal order of accuracy (`None` for spectral).
    pub fn order(&self) -> Option<u32> {
        match self {
            Stencil::Fd2 => Some(2),
            Stencil::Fd4 => Some(4),
            Stencil::Spectral => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Stencil::Fd2 => "fd2",
            Stencil::Fd4 => "fd4",
            Stencil::Spectral => "spectral",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fd2" | "2" => Some(Stencil::Fd2),
            "fd4" | "4" => Some(Stencil::Fd4),
            "spectral" => Some(Stencil::Spectral),
            _ => None,
        }
    }
}

/// Forward/inverse FFT pair of a fixed length with unnormalised forward and
/// `1/n`-normalised inverse.
#[derive(Clone)]
pub struct FftPair {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FftPair({})", self.n)
    }
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [C64]) {
        self.fwd.process(buf);
    }

    pub fn inverse(&self, buf: &mut [C64]) {
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }
}

/// A `∂x` operator bound to a grid.
#[derive(Debug, Clone)]
pub struct Derivative {
    stencil: Stencil,
    dx: f64,
    k: Vec<f64>,
    fft: Option<FftPair>,
}

impl Derivative {
    pub fn new(grid: &Grid, stencil: Stencil) -> Self {
        let fft = (stencil == Stencil::Spectral).then(|| FftPair::new(grid.n_points()));
        Self { stencil, dx: grid.dx(), k: grid.wavenumbers(), fft }
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    /// `out = ∂x f` (periodic).
    pub fn apply(&self, f: &[C64], out: &mut [C64]) {
        let n = f.len();
        assert_eq!(n, out.len());
        match self.stencil {
            Stencil::Fd2 => {
                let c = 0.5 / self.dx;
                for j in 0..n {
                    out[j] = (f[(j + 1) % n] - f[(j + n - 1) % n]) * c;
                }
            }
            Stencil::Fd4 => {
                let c = 1.0 / (12.0 * self.dx);
                for j in 0..n {
                    out[j] = (-f[(j + 2) % n] + f[(j + 1) % n] * 8.0 - f[(j + n - 1) % n] * 8.0 + f[(j + n - 2) % n]) * c;
                }
            }
            Stencil::Spectral => {
                let fft = self.fft.as_ref().expect("spectral derivative has a plan");
                out.copy_from_slice(f);
                fft.forward(out);
                for (z, &k) in out.iter_mut().zip(&self.k) {
                    *z *= C64::new(0.0, k);
                }
                fft.inverse(out);
            }
        }
    }

    pub fn apply_vec(&self, f: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); f.len()];
        self.apply(f, &mut out);
        out
    }

    /// Dense real antisymmetric matrix of the operator, row-major `n×n`.
    pub fn matrix(&self, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n * n];
        match self.stencil {
            Stencil::Fd2 => {
                let c = 0.5 / self.dx;
                for j in 0..n {
                    m[j * n + (j + 1) % n] += c;
                    m[j * n + (j + n - 1) % n] -= c;
                }
            }
            Stencil::Fd4 => {
                let c = 1.0 / (12.0 * self.dx);
                for j in 0..n {
                    m[j * n + (j + 2) % n] -= c;
                    m[j * n + (j + 1) % n] += 8.0 * c;
                    m[j * n + (j + n - 1) % n] -= 8.0 * c;
                    m[j * n + (j + n - 2) % n] += c;
                }
            }
            Stencil::Spectral => {
                // D_jl = (π/L) (-1)^(j-l) cot(π (j-l)/n) for even n.
                let l = n as f64 * self.dx;
                let pre = std::f64::consts::PI / l;
                for j in 0..n {
                    for i in 0..n {
                        if i == j {
                            continue;
                        }
                        let d = j as i64 - i as i64;
                        let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        let arg = std::f64::consts::PI * d as f64 / n as f64;
                        m[j * n + i] = pre * sign / arg.tan();
                    }
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &Grid) -> (Vec<C64>, Vec<C64>) {
        let f = grid.nodes().iter().map(|&x| C64::new((-x * x).exp(), 0.0)).collect();
        let df = grid.nodes().iter().map(|&x| C64::new(-2.0 * x * (-x * x).exp(), 0.0)).collect();
        (f, df)
    }

    #[test]
    fn derivative_orders() {
        for (st, expected) in [(Stencil::Fd2, 2.0), (Stencil::Fd4, 4.0)] {
            let mut errs = vec![];
            for n in [256, 512] {
                let g = Grid::symmetric(10.0, n).unwrap();
                let (f, df) = gaussian(&g);
                let d = Derivative::new(&g, st).apply_vec(&f);
                errs.push(d.iter().zip(&df).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
            }
            let order = (errs[0] / errs[1]).log2();
            assert!((order - expected).abs() < 0.1, "{st:?}: order {order}");
        }
    }

    #[test]
    fn spectral_is_exact_for_smooth_data() {
        let g = Grid::symmetric(10.0, 256).unwrap();
        let (f, df) = gaussian(&g);
        let d = Derivative::new(&g, Stencil::Spectral).apply_vec(&f);
        let err = d.iter().zip(&df).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn matrices_match_operators() {
        let g = Grid::symmetric(5.0, 64).unwrap();
        let f: Vec<C64> = (0..64).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        for st in [Stencil::Fd2, Stencil::Fd4, Stencil::Spectral] {
            let d = Derivative::new(&g, st);
            let m = d.matrix(64);
            let direct = d.apply_vec(&f);
            for j in 0..64 {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..64 {
                    s += f[i] * m[j * 64 + i];
                    assert!((m[j * 64 + i] + m[i * 64 + j]).abs() < 1e-12);
                }
                assert!((s - direct[j]).norm() < 1e-10, "{st:?} row {j}");
            }
        }
    }
}
