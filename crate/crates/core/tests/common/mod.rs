//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use dgl_core::{DiracOperator, Grid, PotentialPair, Stencil};

/// Reference potential on `[-30, 30]`.
pub fn reference_operator(n: usize) -> DiracOperator {
    let g = Grid::symmetric(30.0, n).unwrap();
    DiracOperator::new(g, PotentialPair::reference(&g), Stencil::Spectral).unwrap()
}

/// Least-squares `(slope, intercept)` of `log y` against `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

use dgl_core::evolve::{causal_grid, extend_operator};
use dgl_core::field::SpinorField;
use dgl_core::soliton::{local_branch, SolitonBranch};
use dgl_core::{Nonlinearity, C64};

/// Off-centre two-component Gaussian, projected onto the continuous subspace.
pub fn gaussian_pac(op: &DiracOperator) -> SpinorField {
    let f =
        SpinorField::from_fn(*op.grid(), |x| (C64::new((-(x - 1.0) * (x - 1.0)).exp(), 0.0), C64::new(0.0, 0.5 * (-x * x / 2.0).exp())));
    op.pac_project(&f).unwrap()
}

/// `δ` times the normalised `P_ac` projection of the even bump `e^{−x²/2}(1, 1)`.
pub fn even_bump(op: &DiracOperator, delta: f64) -> SpinorField {
    let f = SpinorField::from_fn(*op.grid(), |x| {
        let e = C64::new((-x * x / 2.0).exp(), 0.0);
        (e, e)
    });
    let f = op.pac_project(&f).unwrap();
    f.scale_re(delta / f.l2_norm())
}

/// Sextic branch around `a = 0.5`, solved on the reference grid and embedded
/// in a box causal for `t_final`.
pub fn sextic_branch_on_causal_box(t_final: f64) -> (DiracOperator, SolitonBranch, f64) {
    let op = reference_operator(512);
    let nl = Nonlinearity::feshbach(1.0);
    let br = local_branch(&op, &nl, 0.5, 0.1, 3).unwrap();
    let grid = causal_grid(op.grid(), t_final, 8.0).unwrap();
    let big = extend_operator(&op, grid).unwrap();
    let omega = br.points[3].omega;
    let br = br.embed(&big).unwrap();
    (big, br, omega)
}

use dgl_core::linalg::complex_solve_many;

/// `β`, `γ` of the reference potential, written out independently.
pub fn reference_potential(x: f64) -> (f64, f64) {
    let s = 1.0 / x.cosh();
    (-0.6 * s * s, 0.3 * s * s)
}

/// Transfer-matrix oracle for `(a⁺, b⁺)`: integrates `H u = λu` with
/// classical RK4 from `u = e^{ikx}[1, α₊]` at `x = L` down to `x = −L` and
/// decomposes `u(−L) = a e^{ikx}[1, α₊] + b e^{−ikx}[1, α₋]`.
pub fn transfer_oracle(pot: impl Fn(f64) -> (f64, f64), k: f64, half_width: f64, h: f64) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    let s = (1.0 + k * k).sqrt();
    let lambda = -s;
    let (ap, am) = (s + k, s - k);
    let rhs = |x: f64, u: [C64; 2]| -> [C64; 2] {
        let (b, g) = pot(x);
        [i * (lambda - b) * u[0] - i * (g - 1.0) * u[1], -i * (lambda - b) * u[1] + i * (g - 1.0) * u[0]]
    };
    let n = (2.0 * half_width / h).round() as usize;
    let h = -2.0 * half_width / n as f64;
    let e = C64::from_polar(1.0, k * half_width);
    let mut u = [e, e * ap];
    let mut x = half_width;
    let add = |u: [C64; 2], k: [C64; 2], c: f64| [u[0] + k[0] * c, u[1] + k[1] * c];
    for _ in 0..n {
        let k1 = rhs(x, u);
        let k2 = rhs(x + 0.5 * h, add(u, k1, 0.5 * h));
        let k3 = rhs(x + 0.5 * h, add(u, k2, 0.5 * h));
        let k4 = rhs(x + h, add(u, k3, h));
        for c in 0..2 {
            u[c] += (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (h / 6.0);
        }
        x += h;
    }
    // [1 1; α₊ α₋] [A; B] = u(−L)
    let det = am - ap;
    let big_a = (u[0] * am - u[1]) / det;
    let big_b = (u[1] - u[0] * ap) / det;
    let xl = -half_width;
    (big_a * C64::from_polar(1.0, -k * xl), big_b * C64::from_polar(1.0, k * xl))
}

/// Limiting-absorption oracle: columns of `(H_L − iW − λ − iε)⁻¹ / dx` for the
/// dense reference operator on a box of half-width `half_width` with the
/// spacing of `base` divided by `refine`, evaluated at `(x, y)` pairs (all nodes of `base`) for
/// each `ε`, and extrapolated quadratically to `ε → 0` (the `ε` must be in
/// ratio 1:2:4).  `W ≥ 0` is a quadratic absorbing ramp on the outer half of
/// the box, which keeps radiation from wrapping around the periodic box so
/// that `ε` can be small.
pub fn absorption_oracle(
    base: &Grid,
    refine: usize,
    lambda: f64,
    eps: [f64; 3],
    half_width: f64,
    pairs: &[(f64, f64)],
) -> Vec<[[C64; 2]; 2]> {
    // a symmetric box whose nodes include those of `base` (even node counts
    // leave 0 between nodes, so the refinement must be odd)
    assert!(refine % 2 == 1, "refinement must be odd");
    let cells = ((half_width - base.x_max()) / base.dx()).round();
    let half_width = base.x_max() + cells * base.dx();
    let dx = base.dx() / refine as f64;
    let n = (2.0 * half_width / dx).round() as usize + 1;
    let grid = Grid::symmetric(half_width, n).unwrap();
    let op = DiracOperator::new(grid, PotentialPair::reference(&grid), Stencil::Spectral).unwrap();
    let mut ys: Vec<usize> = pairs.iter().map(|p| grid.nearest(p.1)).collect();
    ys.sort();
    ys.dedup();
    let per_eps: Vec<Vec<[[C64; 2]; 2]>> = eps
        .iter()
        .map(|&e| {
            let mut m = op.matrix();
            let inner = 0.5 * half_width;
            for d in 0..m.n {
                let x = grid.x(d % n).abs();
                let w = if x > inner { 0.3 * ((x - inner) / (half_width - inner)).powi(2) } else { 0.0 };
                m.add(d, d, -C64::new(lambda, e + w));
            }
            let rhs: Vec<Vec<C64>> = ys
                .iter()
                .flat_map(|&j| {
                    (0..2).map(move |c| {
                        let mut r = vec![C64::new(0.0, 0.0); 2 * n];
                        r[c * n + j] = C64::new(1.0 / dx, 0.0);
                        r
                    })
                })
                .collect();
            let mut cols = complex_solve_many(&m, &rhs).unwrap();
            // the even-n spectral derivative annihilates the Nyquist mode, which
            // would otherwise add a spurious (−1)^{i−j}/L term to every entry
            for col in cols.iter_mut() {
                for c in 0..2 {
                    let part = &mut col[c * n..(c + 1) * n];
                    let alt: C64 = part.iter().enumerate().map(|(i, z)| if i % 2 == 0 { *z } else { -*z }).sum::<C64>() / n as f64;
                    for (i, z) in part.iter_mut().enumerate() {
                        *z -= if i % 2 == 0 { alt } else { -alt };
                    }
                }
            }
            pairs
                .iter()
                .map(|&(x, y)| {
                    let (i, j) = (grid.nearest(x), grid.nearest(y));
                    let q = ys.iter().position(|&v| v == j).unwrap();
                    let mut g = [[C64::new(0.0, 0.0); 2]; 2];
                    for c in 0..2 {
                        let col = &cols[2 * q + c];
                        g[0][c] = col[i];
                        g[1][c] = col[n + i];
                    }
                    g
                })
                .collect()
        })
        .collect();
    // quadratic Richardson for ε, 2ε, 4ε: (8 R(ε) − 6 R(2ε) + R(4ε)) / 3
    (0..pairs.len())
        .map(|p| {
            let mut g = [[C64::new(0.0, 0.0); 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    g[a][b] = (per_eps[0][p][a][b] * 8.0 - per_eps[1][p][a][b] * 6.0 + per_eps[2][p][a][b]) / 3.0;
                }
            }
            g
        })
        .collect()
}

/// Frobenius norm of a 2×2 block.
pub fn norm22(m: &[[C64; 2]; 2]) -> f64 {
    m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
