use popa_core::sampling::{sample_box, seeded_rng};
use popa_core::tilt::{guarantee_radii, DEFAULT_MAX_ITER};
use popa_core::{
    analyze, classify_2d, radiality_check, st_roots, tilt_inverse, tilt_inverse_report, tilt_solve_fixed_point, tilt_t,
    verify_gs, wj_build_s, wj_extract, xi_root, AlgebraKind, Element, Error, GsSolution, SigmaMatrix,
};
use rand::Rng;
use serde_json::{json, Value};

use crate::input::{self, ClassifyInput};
use crate::{CliError, Opts};

/// A report and whether its checks passed.
pub type Outcome = Result<(Value, bool), CliError>;

/// Default radiality grid `0, 0.25, ..., 3`.
fn default_t_grid() -> Vec<f64> {
    (0..=12).map(|k| 0.25 * k as f64).collect()
}

/// Upper bound on the sample set fed to the triple checks, whose cost is
/// quadratic in its size.
const WJ_LAMBDA_SAMPLES: usize = 128;

fn coords(e: &Element) -> Value {
    json!(e.coords())
}

fn sigma_report(m: &SigmaMatrix, tol: f64) -> Result<Value, CliError> {
    let r = analyze(m, tol);
    let mut out = json!({
        "valid": r.valid,
        "dim": m.dim(),
        "rank": r.rank,
        "kernel_dim": r.kernel_dim,
        "kernel_basis": r.kernel_basis,
    });
    if let Some(p) = &r.partition {
        out["partition"] = json!(p.parts_one_based());
        out["rho"] = json!(p.rho());
        out["factors"] = json!(r.factors);
        out["max_factor_defect"] = json!(r.max_factor_defect);
        if m.dim() == 2 {
            let sol = GsSolution::from_sigma(m, tol)?;
            let c = classify_2d(&sol)?;
            out["class"] = json!(c.class);
            out["params"] = json!(c.params);
        }
    }
    if let Some((i, j)) = r.violation {
        out["violation"] = json!({ "row": i, "col": j });
    }
    Ok(out)
}

pub fn classify(opts: &Opts, v: Value) -> Outcome {
    match input::classify_input(v)? {
        ClassifyInput::Sigma(m) => {
            let report = sigma_report(&m, opts.tol)?;
            let valid = report["valid"].as_bool().unwrap_or(false);
            Ok((report, valid))
        }
        ClassifyInput::Solution(sol) => {
            let mut report = json!({ "variant": sol.variant().name() });
            if sol.algebra().kind() == AlgebraKind::HadamardRd && sol.is_affine() {
                let m = SigmaMatrix::from_matrix(sol.derivative_matrix()?.clone())?;
                report["structure"] = sigma_report(&m, opts.tol)?;
            }
            match classify_2d(&sol) {
                Ok(c) => {
                    report["class"] = json!(c.class);
                    report["params"] = json!(c.params);
                }
                Err(Error::UnsupportedDimension(_) | Error::UnsupportedAlgebra(_)) => {}
                Err(e) => return Err(e.into()),
            }
            let valid = report["structure"]["valid"].as_bool().unwrap_or(true);
            Ok((report, valid))
        }
    }
}

fn verify_report(opts: &Opts, sol: &GsSolution) -> Result<(Value, bool), CliError> {
    let r = verify_gs(sol, opts.samples, opts.seed, opts.box_radius)?;
    let passed = r.passes(opts.tol);
    let worst = r.worst_pair.as_ref().map(|(x, y)| json!([x.coords(), y.coords()]));
    Ok((
        json!({
            "samples": opts.samples,
            "seed": opts.seed,
            "box_radius": opts.box_radius,
            "tol": opts.tol,
            "max_gs_residual": r.max_gs_residual,
            "max_goldie_residual": r.max_goldie_residual,
            "samples_tested": r.samples_tested,
            "rejected": r.rejected,
            "worst_pair": worst,
            "passed": passed,
        }),
        passed,
    ))
}

pub fn verify(opts: &Opts, v: Value) -> Outcome {
    let sol = input::solution(v)?;
    let (mut report, passed) = verify_report(opts, &sol)?;
    report["variant"] = json!(sol.variant().name());
    report["solution"] = json!(sol);
    Ok((report, passed))
}

pub fn tilt(opts: &Opts, v: Value) -> Outcome {
    let p = input::point_input(v, "u")?;
    let (sol, u) = (&p.solution, &p.point);
    let grid = p.t_grid.clone().unwrap_or_else(default_t_grid);
    let defect = radiality_check(sol, u, &grid)?;
    let passed = defect < opts.tol;
    Ok((
        json!({
            "u": coords(u),
            "gamma_u": coords(&sol.gamma(u)?),
            "tilt": coords(&tilt_t(sol, u)?),
            "t_grid": grid,
            "radiality_defect": defect,
            "passed": passed,
            "solution": sol,
        }),
        passed,
    ))
}

pub fn invert_tilt(opts: &Opts, v: Value) -> Outcome {
    let p = input::point_input(v, "v")?;
    let r = tilt_inverse_report(&p.solution, &p.point)?;
    let passed = r.roundtrip_residual < opts.tol;
    Ok((
        json!({
            "v": coords(&p.point),
            "u": coords(&r.u),
            "log_identity_defect": r.log_identity_defect,
            "roundtrip_residual": r.roundtrip_residual,
            "passed": passed,
            "solution": p.solution,
        }),
        passed,
    ))
}

pub fn solve_tilt(opts: &Opts, v: Value) -> Outcome {
    let p = input::point_input(v, "v")?;
    let sol = &p.solution;
    let max_iter = opts.max_iter.unwrap_or(DEFAULT_MAX_ITER);
    let (delta, eta) = guarantee_radii(sol.gamma_operator_norm()?);
    let mut report = json!({
        "v": coords(&p.point),
        "max_iter": max_iter,
        "delta": delta,
        "eta": eta,
    });
    match tilt_solve_fixed_point(sol, &p.point, max_iter) {
        Ok(r) => {
            report["converged"] = json!(true);
            report["u"] = coords(&r.u);
            report["iterations"] = json!(r.iterations);
            report["final_residual"] = json!(r.final_residual);
            report["guaranteed"] = json!(r.guaranteed);
            report["max_contraction_ratio"] = json!(r.max_contraction_ratio);
            if sol.is_omega_homogeneous() {
                let closed = tilt_inverse(sol, &p.point)?;
                report["closed_form_gap"] = json!(closed.dist(&r.u));
            }
        }
        Err(Error::NoConvergence {
            iterations,
            residual,
            guaranteed,
        }) => {
            report["converged"] = json!(false);
            report["iterations"] = json!(iterations);
            report["final_residual"] = json!(residual);
            report["guaranteed"] = json!(guaranteed);
        }
        Err(e) => return Err(e.into()),
    }
    report["solution"] = json!(sol);
    let passed = report["converged"] == json!(true);
    Ok((report, passed))
}

pub fn solve_st(opts: &Opts) -> Outcome {
    let n = opts.n_roots;
    let roots = st_roots(n);
    let passed = roots.len() == n;
    Ok((json!({ "n_roots": n, "roots": roots }), passed))
}

pub fn xi(opts: &Opts) -> Outcome {
    let r = xi_root();
    Ok((json!(r), r.residual < opts.tol))
}

pub fn wj(opts: &Opts, v: Value) -> Outcome {
    let sol = input::solution(v)?;
    let alg = sol.algebra().clone();
    let mut rng = seeded_rng(opts.seed);
    let n_lambda = opts.samples.clamp(1, WJ_LAMBDA_SAMPLES);
    let mut lambdas = Vec::with_capacity(n_lambda);
    let mut draws = 0;
    while lambdas.len() < n_lambda {
        draws += 1;
        if draws > 1000 * n_lambda {
            return Err(Error::DomainExhausted {
                rejected: draws - lambdas.len(),
                total: draws,
            }
            .into());
        }
        let x = sample_box(&mut rng, &alg, opts.box_radius);
        if sol.in_group(&x) {
            lambdas.push(sol.eval(&x));
        }
    }
    let triple = wj_extract(&sol, lambdas.clone())?;
    let check = popa_core::wj_check(&triple, opts.tol);
    let mut report = json!({
        "variant": sol.variant().name(),
        "kernel_dim": triple.kernel_basis().len(),
        "lambda_samples": n_lambda,
        "check": check,
    });
    let mut passed = check.passed;
    if passed {
        let oracle = wj_build_s(&triple, opts.tol)?;
        let basis = triple.kernel_basis().to_vec();
        let mut worst = 0.0_f64;
        for _ in 0..opts.samples {
            let l = &lambdas[rng.random_range(0..lambdas.len())];
            let mut x = triple.w(l);
            for b in &basis {
                x = &x + &b.scale(rng.random_range(-1.0..1.0));
            }
            worst = worst.max(oracle.eval(&x).dist(&sol.eval(&x)));
        }
        report["covered_points"] = json!(opts.samples);
        report["max_oracle_deviation"] = json!(worst);
        passed = worst < opts.tol;
    }
    report["passed"] = json!(passed);
    report["solution"] = json!(sol);
    Ok((report, passed))
}

pub fn report(opts: &Opts, v: Value) -> Outcome {
    let sol = input::solution(v)?;
    let mut out = json!({
        "variant": sol.variant().name(),
        "algebra": sol.algebra(),
        "omega_homogeneous": sol.is_omega_homogeneous(),
        "affine": sol.is_affine(),
    });
    match sol.rho_of() {
        Ok(rho) => out["rho"] = coords(&rho),
        Err(e) => out["rho_error"] = json!(e.to_string()),
    }
    if let Ok(j) = sol.derivative_matrix() {
        let rows: Vec<Vec<f64>> = j.row_iter().map(|r| r.iter().copied().collect()).collect();
        let gnorm = sol.gamma_operator_norm()?;
        let (delta, eta) = guarantee_radii(gnorm);
        out["gamma_matrix"] = json!(rows);
        out["gamma_norm"] = json!(gnorm);
        out["delta"] = json!(delta);
        out["eta"] = json!(eta);
        let basis: Vec<Value> = sol.kernel_basis()?.iter().map(coords).collect();
        out["kernel_basis"] = json!(basis);
    }
    if let Ok(c) = classify_2d(&sol) {
        out["class"] = json!(c.class);
        out["params"] = json!(c.params);
    }
    let (verify, passed) = verify_report(opts, &sol)?;
    out["verify"] = verify;
    out["passed"] = json!(passed);
    out["solution"] = json!(sol);
    Ok((out, passed))
}
