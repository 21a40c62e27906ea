//! Structural invariants over random inputs.

use dgl_core::evolve::{NormTracker, Propagator, Scheme};
use dgl_core::nonlinearity::eval_nonlinearity;
use dgl_core::{inner_product, DiracOperator, Grid, Nonlinearity, PotentialPair, SpinorField, Stencil, C64};
use proptest::prelude::*;

fn nonlinearities() -> impl Strategy<Value = Nonlinearity> {
    prop_oneof![
        (0.1..2.0f64).prop_map(Nonlinearity::bragg),
        (0.1..2.0f64).prop_map(Nonlinearity::gross_neveu),
        (0.1..2.0f64).prop_map(Nonlinearity::feshbach),
        prop::array::uniform4(-1.0..1.0f64).prop_map(Nonlinearity::general_quartic),
    ]
}

fn c64() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

/// A smooth localised field from a few random Gaussian modes.
fn field(grid: Grid) -> impl Strategy<Value = SpinorField> {
    prop::collection::vec((c64(), c64(), -5.0..5.0f64, 0.3..2.0f64, -2.0..2.0f64), 1..4).prop_map(move |modes| {
        SpinorField::from_fn(grid, |x| {
            modes.iter().fold((C64::new(0.0, 0.0), C64::new(0.0, 0.0)), |(u, v), (a, b, c, w, k)| {
                let env = C64::from_polar((-((x - c) / w).powi(2)).exp(), k * x);
                (u + a * env, v + b * env)
            })
        })
    })
}

fn small_grid() -> Grid {
    Grid::symmetric(20.0, 128).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nonlinearity_is_gauge_invariant(nl in nonlinearities(), u in c64(), v in c64(), theta in -3.2..3.2f64) {
        let e = C64::from_polar(1.0, theta);
        let w = nl.w_point(u, v);
        prop_assert!((nl.w_point(e * u, e * v) - w).abs() <= 1e-12 * (1.0 + w.abs()));
        let (gu, gv) = nl.grad_point(u, v);
        let (ru, rv) = nl.grad_point(e * u, e * v);
        prop_assert!((ru - e * gu).norm() + (rv - e * gv).norm() <= 1e-12 * (1.0 + gu.norm() + gv.norm()));
    }

    #[test]
    fn nonlinearity_is_homogeneous(nl in nonlinearities(), u in c64(), v in c64(), a in 0.1..3.0f64) {
        let p = nl.degree_p() as i32;
        let w = nl.w_point(u, v);
        let wa = nl.w_point(a * u, a * v);
        prop_assert!((wa - a.powi(2 * p + 2) * w).abs() <= 1e-11 * (1.0 + wa.abs()));
        let (gu, gv) = nl.grad_point(u, v);
        let (ru, rv) = nl.grad_point(a * u, a * v);
        let s = a.powi(2 * p + 1);
        prop_assert!((ru - gu * s).norm() + (rv - gv * s).norm() <= 1e-11 * (1.0 + ru.norm() + rv.norm()));
    }

    #[test]
    fn field_nonlinearity_commutes_with_phase(nl in nonlinearities(), f in field(small_grid()), theta in -3.2..3.2f64) {
        let e = C64::from_polar(1.0, theta);
        let lhs = eval_nonlinearity(&nl, &f.scale(e));
        let rhs = eval_nonlinearity(&nl, &f).scale(e);
        prop_assert!(lhs.sub(&rhs).l2_norm() <= 1e-11 * (1.0 + rhs.l2_norm()));
    }

    #[test]
    fn operator_is_symmetric(f in field(small_grid()), g in field(small_grid()), which in 0..3usize, scale in -1.0..1.0f64) {
        let grid = small_grid();
        let stencil = [Stencil::Fd2, Stencil::Fd4, Stencil::Spectral][which];
        let pot = PotentialPair::sech2(&grid, scale, -0.5 * scale, 2.0).unwrap();
        let op = DiracOperator::new(grid, pot, stencil).unwrap();
        let a = inner_product(&f, &op.apply(&g).unwrap()).unwrap();
        let b = inner_product(&op.apply(&f).unwrap(), &g).unwrap();
        prop_assert!((a - b).norm() <= 1e-11 * (1.0 + a.norm()));
    }

    #[test]
    fn free_linear_flow_conserves_charge(f in field(small_grid()), dt in 0.005..0.05f64) {
        let grid = small_grid();
        let op = DiracOperator::new(grid, PotentialPair::zero(&grid), Stencil::Spectral).unwrap();
        let prop = Propagator::new(&op, &Nonlinearity::none(), dt, Scheme::StrangSplit).unwrap();
        let q0 = f.charge();
        let mut u = f;
        for s in 0..50 {
            prop.step(&mut u, s as f64 * dt).unwrap();
        }
        prop_assert!((u.charge() - q0).abs() <= 1e-12 * q0);
    }

    #[test]
    fn nonlinear_flow_conserves_charge(nl in nonlinearities(), f in field(small_grid()), amp in 0.05..0.5f64) {
        let grid = small_grid();
        let op = DiracOperator::new(grid, PotentialPair::reference(&grid), Stencil::Spectral).unwrap();
        let f = f.scale_re(amp / f.sup_norm());
        prop_assume!(nl.preserves_moduli());
        let prop = Propagator::new(&op, &nl, 0.01, Scheme::StrangSplit).unwrap();
        let q0 = f.charge();
        let mut u = f;
        for s in 0..50 {
            prop.step(&mut u, s as f64 * 0.01).unwrap();
        }
        prop_assert!((u.charge() - q0).abs() <= 1e-12 * q0);
    }

    #[test]
    fn tracker_values_are_monotone(fs in prop::collection::vec(field(small_grid()), 2..6), alpha in 0.5..2.0f64) {
        let mut tr = NormTracker::new(small_grid(), alpha);
        let mut prev = tr.values();
        for (j, f) in fs.iter().enumerate() {
            tr.push(0.1 * j as f64, f);
            let v = tr.values();
            prop_assert!(v.strichartz >= prev.strichartz && v.energy >= prev.energy);
            prop_assert!(v.local >= prev.local && v.local_dx >= prev.local_dx);
            prev = v;
        }
    }

    #[test]
    fn tracker_time_integrals_add(f in field(small_grid()), g in field(small_grid()), h in field(small_grid())) {
        // L⁴ₜ of a piecewise-linear-in-time trapezoid: ∫₀² = ∫₀¹ + ∫₁²
        let grid = small_grid();
        let mut whole = NormTracker::new(grid, 1.0);
        let mut first = NormTracker::new(grid, 1.0);
        let mut second = NormTracker::new(grid, 1.0);
        for (t, x) in [(0.0, &f), (1.0, &g), (2.0, &h)] {
            whole.push(t, x);
            if t <= 1.0 { first.push(t, x); }
            if t >= 1.0 { second.push(t, x); }
        }
        let s4 = |tr: &NormTracker| tr.values().strichartz.powi(4);
        let sum = s4(&first) + s4(&second);
        prop_assert!((s4(&whole) - sum).abs() <= 1e-12 * sum.max(1e-300));
        let l2 = |tr: &NormTracker| tr.values().local.powi(2);
        prop_assert!(l2(&whole) <= l2(&first) + l2(&second) + 1e-12 * l2(&whole));
    }

    #[test]
    fn pac_projection_is_idempotent(f in field(small_grid())) {
        let grid = Grid::symmetric(20.0, 128).unwrap();
        let op = DiracOperator::new(grid, PotentialPair::reference(&grid), Stencil::Spectral).unwrap();
        let p = op.pac_project(&f).unwrap();
        let u0 = &op.bound_state().unwrap().u0;
        prop_assert!(inner_product(u0, &p).unwrap().norm() <= 1e-12 * (1.0 + f.l2_norm()));
        prop_assert!(op.pac_project(&p).unwrap().sub(&p).l2_norm() <= 1e-12 * (1.0 + f.l2_norm()));
        prop_assert!(p.l2_norm() <= f.l2_norm() * (1.0 + 1e-12));
    }
}
