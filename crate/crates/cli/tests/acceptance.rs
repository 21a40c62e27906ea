//! Acceptance run: criteria 1–12, one PASS/FAIL line each.
//!
//! `cargo test --release -p dgl-cli --test acceptance` (the test profile is
//! optimised, so plain `cargo test` works too).

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use dgl_core::evolve::*;
use dgl_core::linstab::*;
use dgl_core::nonlinearity::eval_nonlinearity;
use dgl_core::scattering::*;
use dgl_core::soliton::*;
use dgl_core::{inner_product, DiracOperator, Grid, Nonlinearity, PotentialPair, SpinorField, Stencil, C64};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn free_operator(half_width: f64, n: usize) -> DiracOperator {
    let g = Grid::symmetric(half_width, n).unwrap();
    DiracOperator::new(g, PotentialPair::zero(&g), Stencil::Spectral).unwrap()
}

fn c1_free_field() -> Outcome {
    let op = free_operator(30.0, 256);
    let k: Vec<f64> = (0..20).map(|j| -4.75 + 0.5 * j as f64).collect();
    let c = scattering_coefficients(&op, &k).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for j in 0..k.len() {
        for a in [c.a_plus[j], c.a_minus[j]] {
            worst = worst.max((a - 1.0).norm());
        }
        for b in [c.b_plus[j], c.b_minus[j]] {
            worst = worst.max(b.norm());
        }
    }
    // plane waves of the discrete free symbol pick up exactly e^{−iλdt}
    let g = Grid::symmetric(10.0, 64).unwrap();
    let free = free_operator(10.0, 64);
    let mut phase_err: f64 = 0.0;
    for m in [1usize, 3, 7, 20] {
        let kk = g.wavenumbers()[m];
        let w = (1.0 + kk * kk).sqrt();
        for lambda in [-w, w] {
            let f = SpinorField::from_fn(g, |x| {
                let e = C64::from_polar(1.0, kk * (x - g.x_min()));
                (e, e * (kk - lambda))
            });
            let out = step_full(&f, &free, &Nonlinearity::none(), 0.05).map_err(|e| e.to_string())?;
            phase_err = phase_err.max(out.sub(&f.scale(C64::from_polar(1.0, -lambda * 0.05))).sup_norm());
        }
    }
    check(worst < 1e-10 && phase_err < 1e-12, format!("max |a-1|,|b| = {worst:.2e}; plane-wave phase error {phase_err:.2e}"))
}

fn c2_scattering_identities() -> Outcome {
    let op = reference_operator(512);
    let mut k: Vec<f64> = (0..=100).map(|j| -5.0 + 0.1 * j as f64).filter(|k| k.abs() >= 1e-3).collect();
    k.extend([1e-3, -1e-3, 2e-3, -5e-3, 1e-2, -3e-2, 4.99, -4.99]);
    let c = scattering_coefficients(&op, &k).map_err(|e| e.to_string())?;
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let (r1, r2, r3) = (max(&c.rel1), max(&c.rel2), max(&c.rel3));
    let amin = c.min_abs_a_plus();
    check(
        r1 < 1e-6 && r2 < 1e-6 && r3 < 1e-6 && amin >= 1.0 - 1e-8,
        format!("{} k: rel1 {r1:.1e}, rel2 {r2:.1e}, rel3 {r3:.1e}, min|a+| = {amin:.12}", k.len()),
    )
}

fn c3_wronskian() -> Outcome {
    let op = reference_operator(512);
    let k = [-4.0, -2.2, -0.9, -0.1, 0.3, 1.2, 2.5, 4.8];
    let c = scattering_coefficients(&op, &k).map_err(|e| e.to_string())?;
    let (mut dev, mut mis): (f64, f64) = (0.0, 0.0);
    for (j, &kk) in k.iter().enumerate() {
        let up = solve_jost(&op, kk, Side::Plus).map_err(|e| e.to_string())?;
        let um = solve_jost(&op, kk, Side::Minus).map_err(|e| e.to_string())?;
        let w = wronskian(&up, &um).map_err(|e| e.to_string())?;
        dev = dev.max(w.max_rel_deviation);
        let expect = c.a_plus[j] * (-2.0 * kk);
        mis = mis.max((w.mean - expect).norm() / expect.norm());
    }
    check(dev < 1e-7 && mis < 1e-6, format!("x-deviation {dev:.1e}, |W + 2k a+|/|2k a+| = {mis:.1e}"))
}

fn c4_resolvent() -> Outcome {
    let start = Instant::now();
    let op = reference_operator(256);
    let g = *op.grid();
    let snap = |x: f64| g.x(g.nearest(x));
    let samples: [(f64, &[(f64, f64)]); 2] = [(-1.5, &[(-3.0, 0.0), (2.5, 0.0), (5.0, -1.0)]), (-2.5, &[(-4.0, 1.0), (5.0, 1.0)])];
    let mut worst: f64 = 0.0;
    for (lambda, pairs) in samples {
        let pairs: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (snap(x), snap(y))).collect();
        let oracle = absorption_oracle(&g, 3, lambda, [0.005, 0.01, 0.02], 100.0, &pairs);
        let r = Resolvent::new(&op, lambda).map_err(|e| e.to_string())?;
        for (p, o) in pairs.iter().zip(&oracle) {
            let k = r.kernel(p.0, p.1, ResolventSign::Plus);
            let mut d = [[C64::new(0.0, 0.0); 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    d[a][b] = k[a][b] - o[a][b];
                }
            }
            worst = worst.max(norm22(&d) / norm22(o));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst < 1e-2 && secs < 120.0, format!("5 samples: max relative error {worst:.2e} in {secs:.0} s"))
}

fn c5_explicit_soliton() -> Outcome {
    let nl = Nonlinearity::bragg(1.0 / 3.0);
    let ns = [512usize, 1024, 2048, 4096];
    let mut msg = vec![];
    let mut ok = true;
    for (stencil, order) in [(Stencil::Fd2, 2.0), (Stencil::Fd4, 4.0)] {
        let mut slopes = vec![];
        for omega in [-0.5, 0.0, 0.5] {
            let dx: Vec<f64> = ns.iter().map(|&n| Grid::symmetric(40.0, n).unwrap().dx()).collect();
            let res: Vec<f64> = ns
                .iter()
                .map(|&n| {
                    let g = Grid::symmetric(40.0, n).unwrap();
                    let op = DiracOperator::new(g, PotentialPair::zero(&g), stencil).unwrap();
                    stationary_residual(&op, &nl, omega, &explicit_soliton(omega, g).unwrap()).unwrap()
                })
                .collect();
            let (s, _) = fit_slope(&dx, &res);
            ok &= (s - order).abs() < 0.2;
            slopes.push(format!("{s:.2}"));
        }
        msg.push(format!("{} orders {}", stencil.name(), slopes.join("/")));
    }
    let g = Grid::default();
    let op = DiracOperator::new(g, PotentialPair::zero(&g), Stencil::Spectral).unwrap();
    let mut worst: f64 = 0.0;
    for omega in [-0.5, 0.0, 0.5] {
        let r = stationary_residual(&op, &nl, omega, &explicit_soliton(omega, g).unwrap()).map_err(|e| e.to_string())?;
        worst = worst.max(r);
    }
    ok &= worst < 1e-6;
    msg.push(format!("default-grid residual {worst:.1e}"));
    check(ok, msg.join("; "))
}

fn c6_bifurcation() -> Outcome {
    let op = reference_operator(512);
    let a = [0.01, 0.02, 0.04, 0.05, 0.06, 0.08, 0.1];
    let mut ok = true;
    let mut msg = vec![];
    for (nl, p) in [(Nonlinearity::bragg(1.0), 1i32), (Nonlinearity::feshbach(1.0), 2)] {
        let br = continue_branch(&op, &nl, &a).map_err(|e| e.to_string())?;
        let u0 = &op.bound_state().unwrap().u0;
        let proj = inner_product(u0, &eval_nonlinearity(&nl, u0)).unwrap().re;
        let shift: Vec<f64> = br.points.iter().map(|q| (q.omega - br.omega0).abs()).collect();
        let (slope, intercept) = fit_slope(&a, &shift);
        let ratio = intercept.exp() / proj.abs();
        let corr: Vec<f64> = br.points.iter().map(|q| correction_h1(&br, q)).collect();
        let (cslope, _) = fit_slope(&a, &corr);
        ok &= (slope - 2.0 * p as f64).abs() < 0.05 && (ratio - 1.0).abs() < 0.05 && (cslope - (2 * p + 1) as f64).abs() < 0.1;
        msg.push(format!("p={p}: omega slope {slope:.4}, intercept/projection {ratio:.4}, H1 slope {cslope:.3}"));
    }
    check(ok, msg.join("; "))
}

fn c7_linearization() -> Outcome {
    let op = reference_operator(512);
    let mut ok = true;
    let (mut block, mut hker, mut lf): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut slopes = vec![];
    for (nl, p) in [(Nonlinearity::bragg(1.0), 1.0), (Nonlinearity::feshbach(1.0), 2.0)] {
        let a = [0.025, 0.05, 0.1, 0.2];
        let mut w1 = vec![];
        for &ai in &a {
            let br = local_branch(&op, &nl, ai, 0.01, 1).map_err(|e| e.to_string())?;
            let pt = &br.points[1];
            let lm = linearization_matrices(&nl, &pt.profile);
            let b = block_operators(&op, pt.omega, &lm).map_err(|e| e.to_string())?;
            block = block.max(b.block_residual);
            hker = hker.max(b.h_minus_kernel_residual(&pt.profile).unwrap());
            let (du, _) = branch_derivatives(&br, pt.omega).unwrap();
            lf = lf.max(jordan_chain_residuals(&op, pt.omega, &lm, &pt.profile, &du).unwrap().0);
            let (ep, _) = linearized_spectrum(&b, b.gap_window()).map_err(|e| e.to_string())?;
            if ep.len() != 1 {
                return Err(format!("H+ has {} gap eigenvalues at a = {ai}", ep.len()));
            }
            w1.push(ep[0].abs());
        }
        let (s, _) = fit_slope(&a, &w1);
        ok &= (s - 2.0 * p).abs() < 0.2;
        slopes.push(format!("{s:.3}"));
    }
    // L_ω G − F is a difference quotient along the branch: it must vanish at
    // the order of the ω-difference (2) as the branch step shrinks
    let nl = Nonlinearity::bragg(1.0);
    let steps = [0.08, 0.04, 0.02];
    let mut lg = vec![];
    for &h in &steps {
        let br = local_branch(&op, &nl, 0.1, h, 1).map_err(|e| e.to_string())?;
        let pt = &br.points[1];
        let lm = linearization_matrices(&nl, &pt.profile);
        let (du, _) = branch_derivatives(&br, pt.omega).unwrap();
        lg.push(jordan_chain_residuals(&op, pt.omega, &lm, &pt.profile, &du).unwrap().1);
    }
    let (gslope, _) = fit_slope(&steps, &lg);
    ok &= block < 1e-10 && hker < 1e-8 && lf < 1e-8 && (gslope - 2.0).abs() < 0.15;
    check(
        ok,
        format!(
            "block {block:.1e}, H-[U;-V] {hker:.1e}, L F {lf:.1e}, L G - F order {gslope:.2} (finest {:.1e}), omega1 slopes {}",
            lg[2],
            slopes.join("/")
        ),
    )
}

fn c8_forces() -> Outcome {
    let op = reference_operator(256);
    let mut ok = true;
    let mut msg = vec![];
    let mut lin: f64 = 0.0;
    for nl in [Nonlinearity::bragg(1.0), Nonlinearity::feshbach(1.0)] {
        let br = local_branch(&op, &nl, 0.3, 0.05, 2).map_err(|e| e.to_string())?;
        let jet = br.jet(br.points[2].omega).unwrap();
        let w = SpinorField::from_fn(*op.grid(), |x| {
            (C64::new((-x * x / 3.0).exp(), 0.4 * x / (1.0 + x * x)), C64::new(0.2 * (-(x - 1.0).powi(2)).exp(), -0.3))
        });
        let w = w.scale_re(1.0 / w.l2_norm());
        let (l1, l2) = linear_forces(&jet, &nl, &w).unwrap();
        lin = lin.max(l1.abs() + l2.abs());
        let eps = [1e-3, 1e-2, 1e-1];
        let force: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let s = modulation_system(&jet, &nl, &w.scale_re(e)).unwrap();
                s.f1.abs() + s.f2.abs()
            })
            .collect();
        let (s, _) = fit_slope(&eps, &force);
        ok &= (s - 2.0).abs() < 0.1;
        msg.push(format!("p={}: slope {s:.3}", nl.degree_p()));
    }
    ok &= lin < 1e-10;
    msg.push(format!("linear terms {lin:.1e}"));
    check(ok, msg.join("; "))
}

fn c9_conservation() -> Outcome {
    let op = reference_operator(256);
    let nl = Nonlinearity::feshbach(1.0);
    let br = local_branch(&op, &nl, 0.5, 0.05, 1).map_err(|e| e.to_string())?;
    let mut u = br.points[1].profile.add(&even_bump(&op, 0.3));
    let q0 = u.charge();
    let dt = 1e-3;
    let p = Propagator::new(&op, &nl, dt, Scheme::StrangSplit).map_err(|e| e.to_string())?;
    let mut drift: f64 = 0.0;
    for s in 0..50_000 {
        p.step(&mut u, s as f64 * dt).map_err(|e| e.to_string())?;
        drift = drift.max((u.charge() - q0).abs() / q0);
    }
    let op = reference_operator(512);
    let br = local_branch(&op, &nl, 0.2, 0.02, 1).map_err(|e| e.to_string())?;
    let pt = &br.points[1];
    let dt = 0.01;
    let p = Propagator::new(&op, &nl, dt, Scheme::StrangSplit).map_err(|e| e.to_string())?;
    let mut u = pt.profile.clone();
    for s in 0..1000 {
        p.step(&mut u, s as f64 * dt).map_err(|e| e.to_string())?;
    }
    let orbit = u.sub(&pt.profile.scale(C64::from_polar(1.0, -pt.omega * 10.0))).l2_norm();
    check(drift < 1e-8 && orbit < 1e-5, format!("charge drift {drift:.1e} over T=50; orbit error {orbit:.1e} at T=10"))
}

fn c10_asymptotic_stability() -> Outcome {
    let t_final = 100.0;
    let (op, br, omega) = sextic_branch_on_causal_box(t_final);
    let nl = br.nonlinearity.clone();
    let deltas = [1e-3, 3e-3, 1e-2];
    let runs: Vec<Result<Trajectory, String>> = std::thread::scope(|s| {
        let handles: Vec<_> = deltas
            .iter()
            .map(|&d| {
                let (op, br, nl) = (&op, &br, &nl);
                s.spawn(move || {
                    let init = initial_state(br, omega, &even_bump(op, d)).map_err(|e| e.to_string())?;
                    let cfg = EvolutionConfig { dt: 0.02, t_final, scheme: Scheme::Rk4, record_stride: 50, ..Default::default() };
                    evolve_modulated(&init, Some(br), op, nl, &cfg).map_err(|e| e.to_string())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let runs: Vec<Trajectory> = runs.into_iter().collect::<Result<_, _>>()?;
    let big = &runs[2];
    let (ov, ot) = big.omega_convergence();
    let (pv, pt) = big.phase_convergence();
    let sup = big.sup_decay_factor();
    let drift: Vec<f64> = runs.iter().map(|t| t.omega_drift()).collect();
    let (slope, _) = fit_slope(&deltas, &drift);
    check(
        ov < 0.1 * ot && pv < 0.1 * pt && sup >= 3.0 && (slope - 2.0).abs() < 0.15,
        format!("omega late/total {:.3}, phase late/total {:.3}, sup decay x{sup:.2}, drift slope {slope:.3}", ov / ot, pv / pt),
    )
}

fn c11_dispersive_norms() -> Outcome {
    let op = reference_operator(512);
    let f = gaussian_pac(&op);
    let (short, long) = std::thread::scope(|s| {
        let a = s.spawn(|| semigroup_decay(&op, &f, 50.0, DEFAULT_ALPHA));
        let b = s.spawn(|| semigroup_decay(&op, &f, 200.0, DEFAULT_ALPHA));
        (a.join().unwrap(), b.join().unwrap())
    });
    let (short, long) = (short.map_err(|e| e.to_string())?, long.map_err(|e| e.to_string())?);
    let tail = long.saturation_tail();
    let growth = long.strichartz_quotient[2] / short.strichartz_quotient[2];
    check(
        tail < 0.05 && growth < 10.0 && !long.contaminated,
        format!(
            "M(T) tail {:.2}% on n = {} (boundary {:.1e}); Strichartz quotient {:.3} -> {:.3}",
            100.0 * tail,
            long.grid.n_points(),
            long.boundary_amplitude,
            short.strichartz_quotient[2],
            long.strichartz_quotient[2]
        ),
    )
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "[grid]\nn_points = 256\n[run]\nk_grid = linspace(-3, 3, 12)\nt_final = 2\nseed = 11\n").unwrap();
    let mut compared = 0;
    for sub in ["spectrum", "scattering", "soliton", "evolve"] {
        let mut outs = vec![];
        for (rep, threads) in [(0, "1"), (1, "3")] {
            let out = dir.path().join(format!("{sub}_{rep}"));
            let st = std::process::Command::new(env!("CARGO_BIN_EXE_dgl"))
                .args([sub, "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .env("DGL_THREADS", threads)
                .output()
                .map_err(|e| e.to_string())?;
            if !st.status.success() {
                return Err(format!("{sub} failed: {}", String::from_utf8_lossy(&st.stderr)));
            }
            outs.push(out);
        }
        let mut names: Vec<_> = std::fs::read_dir(&outs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for n in names {
            let a = std::fs::read(outs[0].join(&n)).unwrap();
            let b = std::fs::read(outs[1].join(&n)).unwrap();
            if a != b {
                return Err(format!("{sub}: {n:?} differs"));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} files byte-identical across repeated runs (1 and 3 threads)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("free-field oracles", c1_free_field),
        ("scattering identities", c2_scattering_identities),
        ("Wronskian", c3_wronskian),
        ("resolvent kernel", c4_resolvent),
        ("explicit soliton", c5_explicit_soliton),
        ("bifurcation scalings", c6_bifurcation),
        ("linearization identities", c7_linearization),
        ("modulation-force quadraticity", c8_forces),
        ("conservation and orbit fidelity", c9_conservation),
        ("asymptotic-stability signatures", c10_asymptotic_stability),
        ("dispersive-norm saturation", c11_dispersive_norms),
        ("determinism", c12_determinism),
    ];
    // `cargo test -- <filter>` style selection by criterion number
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut total = Duration::ZERO;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let dt = start.elapsed();
        total += dt;
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {n:>2} {name}: {detail} [{:.1} s]", dt.as_secs_f64());
    }
    println!("acceptance: {failed} failed, total {:.0} s", total.as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
