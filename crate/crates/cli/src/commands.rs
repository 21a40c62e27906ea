//! The six pipelines behind the subcommands.

use dgl_core::evolve::{
    causal_grid, evolve_modulated, extend_operator, initial_state, semigroup_decay_with, EvolutionConfig, ModulationState, Trajectory,
};
use dgl_core::linstab::{block_operators, jordan_chain_residuals, kernel_identities, linearization_matrices, linearized_spectrum};
use dgl_core::parallel::map_ordered;
use dgl_core::scattering::{scattering_coefficients, solve_jost, wronskian, Side};
use dgl_core::soliton::{branch_derivatives, continue_branch, correction_h1, local_branch};
use dgl_core::{DglError, DiracOperator, Nonlinearity, SpinorField, Window, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, nums, Emitter};

type Out = Result<(), CliError>;

/// Support radius assumed for soliton data when sizing the causal box.
const SOLITON_SUPPORT: f64 = 8.0;
/// Target number of rows in a time-series CSV.
const SERIES_ROWS: usize = 1000;

fn operator(cfg: &RunConfig) -> Result<DiracOperator, CliError> {
    let grid = cfg.grid()?;
    let pot = cfg.potential(&grid)?;
    Ok(DiracOperator::new(grid, pot, cfg.grid.stencil)?)
}

fn nonlinearity(cfg: &RunConfig) -> Result<Nonlinearity, CliError> {
    let nl = cfg.nonlinearity()?;
    if nl.is_none() {
        return Err(CliError::Validation("Nonlinearity: this subcommand needs kind != none".into()));
    }
    Ok(nl)
}

/// Least-squares `(slope, intercept)` of `ln y` against `ln x` over the
/// positive finite pairs; `None` with fewer than two.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite()).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Some((slope, my - slope * mx))
}

fn fit_json(fit: Option<(f64, f64)>) -> Value {
    match fit {
        Some((s, i)) => json!({ "slope": num(s), "intercept": num(i) }),
        None => Value::Null,
    }
}

fn complex(z: C64) -> Value {
    json!([num(z.re), num(z.im)])
}

fn profile_rows(f: &SpinorField, tag: f64) -> Vec<Vec<f64>> {
    (0..f.len()).map(|i| vec![tag, f.grid.x(i), f.u[i].re, f.u[i].im, f.v[i].re, f.v[i].im]).collect()
}

const PROFILE_COLUMNS: [&str; 6] = ["index", "x", "re_u", "im_u", "re_v", "im_v"];

pub fn spectrum(cfg: &RunConfig, em: &mut Emitter) -> Out {
    let op = operator(cfg)?;
    let states = op.point_spectrum(Window::default())?;
    let (gp, gm) = op.resonance_indicator()?;
    let eigen: Vec<Value> = states
        .iter()
        .map(|s| {
            json!({
                "omega": num(s.omega),
                "boundary_amplitude": num(s.boundary_amplitude),
                "truncation_warning": s.truncation_warning,
            })
        })
        .collect();
    let mut body = Map::new();
    body.insert("gap_eigenvalue_count".into(), states.len().into());
    body.insert("gap_eigenvalues".into(), Value::Array(eigen));
    body.insert("gamma_plus".into(), complex(gp));
    body.insert("gamma_minus".into(), complex(gm));
    em.json("spectrum.json", Some(cfg), body)?;
    let rows: Vec<Vec<f64>> = states.iter().enumerate().flat_map(|(j, s)| profile_rows(&s.u0, j as f64)).collect();
    em.csv("eigenfunctions.csv", cfg, &PROFILE_COLUMNS, &rows)
}

pub fn scattering(cfg: &RunConfig, em: &mut Emitter) -> Out {
    let k = &cfg.run.k_grid;
    if k.contains(&0.0) {
        return Err(CliError::Validation("Scattering grid: k_grid must not contain 0 (the coefficients are singular there)".into()));
    }
    let op = operator(cfg)?;
    let c = scattering_coefficients(&op, k)?;
    let w = map_ordered(k, |&kk| -> Result<(C64, f64), DglError> {
        let up = solve_jost(&op, kk, Side::Plus)?;
        let um = solve_jost(&op, kk, Side::Minus)?;
        let w = wronskian(&up, &um)?;
        Ok((w.mean, w.max_rel_deviation))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let mut rows = vec![];
    let mut mismatch: f64 = 0.0;
    for j in 0..k.len() {
        let (wm, dev) = w[j];
        let expect = c.a_plus[j] * (-2.0 * k[j]);
        mismatch = mismatch.max((wm - expect).norm() / expect.norm());
        rows.push(vec![
            k[j],
            c.a_plus[j].re,
            c.a_plus[j].im,
            c.b_plus[j].re,
            c.b_plus[j].im,
            c.a_minus[j].re,
            c.a_minus[j].im,
            c.b_minus[j].re,
            c.b_minus[j].im,
            c.rel1[j],
            c.rel2[j],
            c.rel3[j],
            wm.re,
            wm.im,
            dev,
        ]);
    }
    let cols = [
        "k",
        "re_a_plus",
        "im_a_plus",
        "re_b_plus",
        "im_b_plus",
        "re_a_minus",
        "im_a_minus",
        "re_b_minus",
        "im_b_minus",
        "rel1",
        "rel2",
        "rel3",
        "re_wronskian",
        "im_wronskian",
        "wronskian_deviation",
    ];
    em.csv("scattering.csv", cfg, &cols, &rows)?;
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let mut body = Map::new();
    body.insert("min_abs_a_plus".into(), num(c.min_abs_a_plus()));
    body.insert("max_rel1".into(), num(max(&c.rel1)));
    body.insert("max_rel2".into(), num(max(&c.rel2)));
    body.insert("max_rel3".into(), num(max(&c.rel3)));
    body.insert("max_wronskian_deviation".into(), num(w.iter().map(|p| p.1).fold(0.0, f64::max)));
    body.insert("max_wronskian_mismatch".into(), num(mismatch));
    em.json("scattering.json", Some(cfg), body)
}

pub fn soliton(cfg: &RunConfig, em: &mut Emitter) -> Out {
    let op = operator(cfg)?;
    let nl = nonlinearity(cfg)?;
    let br = continue_branch(&op, &nl, &cfg.run.a_values)?;
    let a: Vec<f64> = br.points.iter().map(|q| q.a).collect();
    let shift: Vec<f64> = br.points.iter().map(|q| q.omega - br.omega0).collect();
    let corr: Vec<f64> = br.points.iter().map(|q| correction_h1(&br, q)).collect();
    let rows: Vec<Vec<f64>> = br
        .points
        .iter()
        .enumerate()
        .map(|(j, q)| vec![q.a, q.omega, shift[j], corr[j], q.profile.charge(), q.residual, q.iterations as f64])
        .collect();
    em.csv("branch.csv", cfg, &["a", "omega", "omega_shift", "correction_h1", "charge", "residual", "iterations"], &rows)?;
    let abs_shift: Vec<f64> = shift.iter().map(|s| s.abs()).collect();
    let omega_fit = loglog_fit(&a, &abs_shift);
    let mut body = Map::new();
    body.insert("omega0".into(), num(br.omega0));
    body.insert("projection".into(), num(br.projection));
    body.insert("degree_p".into(), nl.degree_p().into());
    body.insert("omega_shift_fit".into(), fit_json(omega_fit));
    body.insert("intercept_over_projection".into(), omega_fit.map_or(Value::Null, |(_, i)| num(i.exp() / br.projection.abs())));
    body.insert("correction_fit".into(), fit_json(loglog_fit(&a, &corr)));
    body.insert("symmetry_defect".into(), num(br.symmetry_defect()));
    em.json("soliton.json", Some(cfg), body)?;
    let last = br.points.last().expect("a_values is non-empty");
    em.csv("profile.csv", cfg, &PROFILE_COLUMNS, &profile_rows(&last.profile, (br.points.len() - 1) as f64))
}

pub fn linearize(cfg: &RunConfig, em: &mut Emitter) -> Out {
    let op = operator(cfg)?;
    let nl = nonlinearity(cfg)?;
    // a three-point local branch per amplitude gives a centred ∂ωU
    let points = map_ordered(&cfg.run.a_values, |&a| -> Result<Value, DglError> {
        let br = local_branch(&op, &nl, a, 0.01, 1)?;
        let pt = &br.points[1];
        let lm = linearization_matrices(&nl, &pt.profile);
        let b = block_operators(&op, pt.omega, &lm)?;
        let (ep, em_) = linearized_spectrum(&b, b.gap_window())?;
        let (du, dn) = branch_derivatives(&br, pt.omega)?;
        let (res1, res2) = kernel_identities(&op, pt.omega, &lm, &pt.profile, &du)?;
        let (lf, lg) = jordan_chain_residuals(&op, pt.omega, &lm, &pt.profile, &du)?;
        Ok(json!({
            "a": num(a),
            "omega": num(pt.omega),
            "h_plus_eigenvalues": nums(&ep),
            "h_minus_eigenvalues": nums(&em_),
            "res1": num(res1),
            "res2": num(res2),
            "block_residual": num(b.block_residual),
            "closed_form_defect": num(b.closed_form_defect),
            "h_minus_kernel_residual": num(b.h_minus_kernel_residual(&pt.profile)?),
            "l_f_residual": num(lf),
            "l_g_minus_f_residual": num(lg),
            "dnorm2_domega": num(dn),
        }))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    // |ω₁(a)| where H₊ has exactly one gap eigenvalue
    let (mut a, mut w1) = (vec![], vec![]);
    for p in &points {
        if let Some([e]) = p["h_plus_eigenvalues"].as_array().map(|v| v.as_slice()) {
            a.push(p["a"].as_f64().unwrap_or(f64::NAN));
            w1.push(e.as_f64().unwrap_or(f64::NAN).abs());
        }
    }
    let mut body = Map::new();
    body.insert("points".into(), Value::Array(points));
    body.insert("omega1_fit".into(), fit_json(loglog_fit(&a, &w1)));
    em.json("linearize.json", Some(cfg), body)
}

/// A smooth random profile from `seed`: four Gaussian wave packets.
fn random_profile(op: &DiracOperator, seed: u64) -> SpinorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<[f64; 7]> = (0..4)
        .map(|_| {
            [
                rng.gen_range(-4.0..4.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]
        })
        .collect();
    SpinorField::from_fn(*op.grid(), |x| {
        modes.iter().fold((C64::new(0.0, 0.0), C64::new(0.0, 0.0)), |(u, v), m| {
            let e = C64::from_polar((-((x - m[0]) / m[1]).powi(2)).exp(), m[2] * x);
            (u + e * C64::new(m[3], m[4]), v + e * C64::new(m[5], m[6]))
        })
    })
}

/// Seed 0: the even bump `e^{−x²/2}(1, 1)`; otherwise a seeded random profile.
/// Projected onto the continuous subspace and scaled to `L²` norm `scale`.
fn perturbation(op: &DiracOperator, seed: u64, scale: f64) -> Result<SpinorField, CliError> {
    let f = if seed == 0 {
        SpinorField::from_fn(*op.grid(), |x| {
            let e = C64::new((-x * x / 2.0).exp(), 0.0);
            (e, e)
        })
    } else {
        random_profile(op, seed)
    };
    let f = op.pac_project(&f)?;
    Ok(f.scale_re(scale / f.l2_norm()))
}

fn series(tr: &Trajectory) -> Vec<Vec<f64>> {
    tr.samples.iter().map(|s| vec![s.t, s.omega, s.theta_minus_int, s.a_abs, s.y_sup, s.y_h1, s.charge]).collect()
}

const SERIES_COLUMNS: [&str; 7] = ["t", "omega", "theta_minus_int_omega", "abs_a", "y_sup", "y_h1", "charge"];

/// Fit of `‖Y‖_∞` against `t` over `[T/4, T]`.
fn sup_decay_fit(tr: &Trajectory) -> Option<(f64, f64)> {
    let t_end = tr.samples.last().map_or(0.0, |s| s.t);
    let late: Vec<_> = tr.samples.iter().filter(|s| s.t >= 0.25 * t_end).collect();
    let t: Vec<f64> = late.iter().map(|s| s.t).collect();
    let y: Vec<f64> = late.iter().map(|s| s.y_sup).collect();
    loglog_fit(&t, &y)
}

fn tracker_json(v: dgl_core::evolve::TrackerValues) -> Value {
    json!({
        "strichartz_l4_linf": num(v.strichartz),
        "energy_linf_h1": num(v.energy),
        "local_linf_l2": num(v.local),
        "local_dx_linf_l2": num(v.local_dx),
    })
}

fn evolution_config(cfg: &RunConfig) -> EvolutionConfig {
    let steps = (cfg.run.t_final / cfg.run.dt).round() as usize;
    EvolutionConfig {
        dt: cfg.run.dt,
        t_final: cfg.run.t_final,
        scheme: cfg.run.scheme,
        record_stride: (steps / SERIES_ROWS).max(1),
        ..Default::default()
    }
}

fn grid_json(g: &dgl_core::Grid) -> Value {
    json!({ "x_min": num(g.x_min()), "x_max": num(g.x_max()), "n_points": g.n_points() })
}

pub fn evolve(cfg: &RunConfig, em: &mut Emitter) -> Out {
    let op = operator(cfg)?;
    let nl = nonlinearity(cfg)?;
    let evo = evolution_config(cfg);
    evo.validate(op.grid())?;
    let br = local_branch(&op, &nl, cfg.run.a_center, 0.1, 3)?;
    let omega = br.points[3].omega;
    let big = extend_operator(&op, causal_grid(op.grid(), cfg.run.t_final, SOLITON_SUPPORT)?)?;
    let br = br.embed(&big)?;
    let y0 = perturbation(&big, cfg.run.seed, cfg.run.delta)?;
    let init = initial_state(&br, omega, &y0)?;
    let tr = evolve_modulated(&init, Some(&br), &big, &nl, &evo)?;
    em.csv("evolve.csv", cfg, &SERIES_COLUMNS, &series(&tr))?;
    let (ov, ot) = tr.omega_convergence();
    let (pv, pt) = tr.phase_convergence();
    let first = tr.samples.first().map_or(f64::NAN, |s| s.charge);
    let last = tr.samples.last().map_or(f64::NAN, |s| s.charge);
    let mut body = Map::new();
    body.insert("grid".into(), grid_json(big.grid()));
    body.insert("steps".into(), tr.steps.into());
    body.insert("omega_initial".into(), num(omega));
    body.insert("omega_final".into(), num(tr.final_state.omega));
    body.insert("omega_drift".into(), num(tr.omega_drift()));
    body.insert("omega_late_variation".into(), num(ov));
    body.insert("omega_max_excursion".into(), num(ot));
    body.insert("phase_late_variation".into(), num(pv));
    body.insert("phase_max_excursion".into(), num(pt));
    body.insert("sup_decay_factor".into(), num(tr.sup_decay_factor()));
    body.insert("sup_decay_fit".into(), fit_json(sup_decay_fit(&tr)));
    body.insert("relative_charge_drift".into(), num((last - first).abs() / first));
    body.insert("tracker".into(), tracker_json(tr.tracker.values()));
    body.insert(
        "defects".into(),
        json!({
            "projection": num(tr.max_projection_residual),
            "modulation": num(tr.max_modulation_defect),
            "decomposition": num(tr.max_decomposition_defect),
            "orthogonality": num(tr.max_orthogonality_defect),
        }),
    );
    em.json("evolve.json", Some(cfg), body)
}

pub fn decay(cfg: &RunConfig, em: &mut Emitter) -> Out {
    let op = operator(cfg)?;
    let f = if cfg.run.seed == 0 {
        let f = SpinorField::from_fn(*op.grid(), |x| {
            (C64::new((-(x - 1.0) * (x - 1.0)).exp(), 0.0), C64::new(0.0, 0.5 * (-x * x / 2.0).exp()))
        });
        op.pac_project(&f)?
    } else {
        perturbation(&op, cfg.run.seed, 1.0)?
    };
    let rep = semigroup_decay_with(&op, &f, cfg.run.t_final, cfg.run.alpha_weight, cfg.run.dt)?;
    // the same flow through the modulated driver gives the time series
    let big = extend_operator(&op, rep.grid)?;
    let b = big.bound_state()?;
    let init = ModulationState::new(0.0, b.omega, 0.0, f.embed(rep.grid)?, &b.u0)?;
    let evo = EvolutionConfig { scheme: dgl_core::evolve::Scheme::StrangSplit, ..evolution_config(cfg) };
    let tr = evolve_modulated(&init, None, &big, &Nonlinearity::none(), &evo)?;
    em.csv("decay.csv", cfg, &SERIES_COLUMNS, &series(&tr))?;
    let mut body = Map::new();
    body.insert("grid".into(), grid_json(&rep.grid));
    body.insert("checkpoints".into(), nums(&rep.checkpoints));
    body.insert("mizumachi".into(), nums(&rep.mizumachi));
    body.insert("strichartz_quotient".into(), nums(&rep.strichartz_quotient));
    body.insert("saturation_tail".into(), num(rep.saturation_tail()));
    body.insert("data_norm".into(), num(rep.data_norm));
    body.insert("boundary_amplitude".into(), num(rep.boundary_amplitude));
    body.insert("contaminated".into(), rep.contaminated.into());
    body.insert("tracker".into(), tracker_json(rep.tracker));
    body.insert("sup_decay_fit".into(), fit_json(sup_decay_fit(&tr)));
    body.insert("series_mismatch".into(), num(tr.final_state.y.sub(&rep.final_field).l2_norm()));
    em.json("decay.json", Some(cfg), body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loglog_fit_recovers_power_law() {
        let x = [0.1, 0.2, 0.4, 0.8];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(4)).collect();
        let (s, i) = loglog_fit(&x, &y).unwrap();
        assert!((s - 4.0).abs() < 1e-12 && (i.exp() - 3.0).abs() < 1e-12);
        assert!(loglog_fit(&[1.0], &[1.0]).is_none());
        assert!(loglog_fit(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }
}
