//! Browser bindings: the explicit gap soliton, the transmission curve of a
//! sech² potential pair, and its gap spectrum.
//!
//! Every export returns a flat `Float64Array`; the layout is given on each
//! function.  The `*_impl` functions hold the logic so it can be tested
//! natively; the exports only translate errors into JS exceptions.

use dgl_core::scattering::scattering_coefficients;
use dgl_core::soliton::{explicit_soliton, stationary_residual};
use dgl_core::{DglError, DiracOperator, Grid, Nonlinearity, PotentialPair, Stencil, Window};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 4096;
/// The dense eigensolver is O(n³); keep the page responsive.
const MAX_SPECTRUM_POINTS: usize = 512;

fn grid(half_width: f64, n: usize, cap: usize) -> Result<Grid, DglError> {
    if n > cap {
        return Err(DglError::InvalidArgument(format!("at most {cap} grid points in the browser (got {n})")));
    }
    Grid::symmetric(half_width, n)
}

fn operator(beta: f64, gamma: f64, half_width: f64, n: usize, cap: usize) -> Result<DiracOperator, DglError> {
    let g = grid(half_width, n, cap)?;
    DiracOperator::new(g, PotentialPair::sech2(&g, beta, gamma, 2.0)?, Stencil::Spectral)
}

/// `[x, Re U, Im U, |U|]` per node, then the stationary residual as the last entry.
pub fn soliton_profile_impl(omega: f64, half_width: f64, n: usize) -> Result<Vec<f64>, DglError> {
    let g = grid(half_width, n, MAX_POINTS)?;
    let f = explicit_soliton(omega, g)?;
    let op = DiracOperator::new(g, PotentialPair::zero(&g), Stencil::Spectral)?;
    let res = stationary_residual(&op, &Nonlinearity::bragg(1.0 / 3.0), omega, &f)?;
    let mut out = Vec::with_capacity(4 * n + 1);
    for (i, u) in f.u.iter().enumerate() {
        out.extend([g.x(i), u.re, u.im, u.norm()]);
    }
    out.push(res);
    Ok(out)
}

/// `[k, |a⁺|, |b⁺|/|a⁺|, rel]` per wavenumber on `linspace(k_min, k_max, count)`,
/// skipping `k = 0`; `rel` is the worst scattering-relation residual at `k`.
pub fn scattering_sweep_impl(beta: f64, gamma: f64, k_min: f64, k_max: f64, count: usize) -> Result<Vec<f64>, DglError> {
    let op = operator(beta, gamma, 30.0, 512, MAX_POINTS)?;
    let k: Vec<f64> = (0..count)
        .map(|j| if count == 1 { k_min } else { k_min + (k_max - k_min) * j as f64 / (count - 1) as f64 })
        .filter(|k| *k != 0.0)
        .collect();
    let c = scattering_coefficients(&op, &k)?;
    let mut out = Vec::with_capacity(4 * k.len());
    for j in 0..k.len() {
        let a = c.a_plus[j].norm();
        out.extend([k[j], a, c.b_plus[j].norm() / a, c.rel1[j].max(c.rel2[j]).max(c.rel3[j])]);
    }
    Ok(out)
}

/// Gap eigenvalues of `D + β₀ sech²x + γ₀ sech²x σ₁`, ascending.
pub fn gap_spectrum_impl(beta: f64, gamma: f64, n: usize) -> Result<Vec<f64>, DglError> {
    let op = operator(beta, gamma, 30.0, n, MAX_SPECTRUM_POINTS)?;
    Ok(op.point_spectrum(Window::default())?.iter().map(|b| b.omega).collect())
}

fn js(r: Result<Vec<f64>, DglError>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn version() -> String {
    dgl_core::VERSION.to_string()
}

#[wasm_bindgen]
pub fn soliton_profile(omega: f64, half_width: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(soliton_profile_impl(omega, half_width, n))
}

#[wasm_bindgen]
pub fn scattering_sweep(beta: f64, gamma: f64, k_min: f64, k_max: f64, count: usize) -> Result<Vec<f64>, JsError> {
    js(scattering_sweep_impl(beta, gamma, k_min, k_max, count))
}

#[wasm_bindgen]
pub fn gap_spectrum(beta: f64, gamma: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(gap_spectrum_impl(beta, gamma, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soliton_layout_and_residual() {
        let v = soliton_profile_impl(0.3, 40.0, 2048).unwrap();
        assert_eq!(v.len(), 4 * 2048 + 1);
        assert!(*v.last().unwrap() < 1e-10, "{}", v.last().unwrap());
        // under-resolved grids show up in the residual
        assert!(*soliton_profile_impl(0.3, 40.0, 512).unwrap().last().unwrap() > 1e-6);
        // peak modulus √(1+ω) at the centre
        let peak = v.chunks(4).take(2048).map(|r| r[3]).fold(0.0, f64::max);
        assert!((peak - 1.3f64.sqrt()).abs() < 1e-2);
    }

    #[test]
    fn free_sweep_is_transparent() {
        let v = scattering_sweep_impl(0.0, 0.0, -2.0, 2.0, 5).unwrap();
        assert_eq!(v.len(), 16);
        for r in v.chunks(4) {
            assert!((r[1] - 1.0).abs() < 1e-10 && r[2] < 1e-10);
        }
    }

    #[test]
    fn reference_pair_has_one_gap_eigenvalue() {
        let e = gap_spectrum_impl(-0.6, 0.3, 256).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0] - 0.5909073).abs() < 1e-5);
        assert!(gap_spectrum_impl(-0.6, 0.3, 2048).is_err());
    }
}
