//! Adaptive Dormand–Prince 5(4) integrator for small complex linear systems.

use crate::C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error weights: b − b*
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_steps: 5_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeFailure(pub String);

fn comb<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `(x0, y0)` through the monotone sequence
/// `outputs`, returning the state at each output abscissa.  Steps are clipped
/// to land exactly on every output point.
pub fn integrate<const N: usize, F>(f: F, x0: f64, y0: [C64; N], outputs: &[f64], tol: Tolerances) -> Result<Vec<[C64; N]>, OdeFailure>
where
    F: Fn(f64, &[C64; N]) -> [C64; N],
{
    let mut res = Vec::with_capacity(outputs.len());
    if outputs.is_empty() {
        return Ok(res);
    }
    let dir = if outputs.last().unwrap() >= &x0 { 1.0 } else { -1.0 };
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = dir * 1e-2;
    let mut steps = 0usize;
    for &target in outputs {
        if (target - x) * dir < -1e-12 {
            return Err(OdeFailure("output abscissae are not monotone".into()));
        }
        while (target - x) * dir > 0.0 {
            steps += 1;
            if steps > tol.max_steps {
                return Err(OdeFailure(format!("step budget exhausted at x = {x}")));
            }
            let proposed = h;
            let mut last = false;
            if (x + h - target) * dir >= 0.0 {
                h = target - x;
                last = true;
            }
            let k2 = f(x + C2 * h, &comb(&y, h, &[(A21, &k1)]));
            let k3 = f(x + C3 * h, &comb(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * h, &comb(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(x + C5 * h, &comb(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(x + h, &comb(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y5 = comb(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(x + h, &y5);
            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                let sc = tol.atol + tol.rtol * y[i].norm().max(y5[i].norm());
                err = err.max(e.norm() / sc);
            }
            if !err.is_finite() {
                return Err(OdeFailure(format!("non-finite state near x = {x}")));
            }
            if err <= 1.0 {
                x = if last { target } else { x + h };
                y = y5;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = if last { proposed } else { h * fac };
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h.abs() < 1e-14 {
                    return Err(OdeFailure(format!("step size underflow at x = {x}")));
                }
            }
        }
        res.push(y);
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        // y'' = -y as a complex first-order system: y = e^{ix}
        let out =
            integrate(|_, y: &[C64; 1]| [y[0] * C64::new(0.0, 1.0)], 0.0, [C64::new(1.0, 0.0)], &[1.0, 5.0, 10.0], Tolerances::default())
                .unwrap();
        for (x, y) in [1.0f64, 5.0, 10.0].iter().zip(&out) {
            assert!((y[0] - C64::from_polar(1.0, *x)).norm() < 1e-10);
        }
    }

    #[test]
    fn backward_direction() {
        let out = integrate(|_, y: &[C64; 1]| [y[0]], 0.0, [C64::new(1.0, 0.0)], &[-1.0, -2.0], Tolerances::default()).unwrap();
        assert!((out[1][0].re - (-2.0f64).exp()).abs() < 1e-12);
    }
}
