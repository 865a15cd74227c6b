//! Exponential tilting `T(u) = u(e^{γ(u)} - 1)/γ(u)` and the calculus built
//! on it: the scale `λ_u(t)`, radiality of `N`, inversion of `T` and the
//! one-sided unboundedness of `T` along rays.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, Element, INV_EPS};
use crate::error::{Error, Result};
use crate::scalar;
use crate::solution::GsSolution;

/// Target for `norm(v - T(u))` in the fixed-point solver.
pub const FIXED_POINT_TOL: f64 = 1e-12;

pub const DEFAULT_MAX_ITER: usize = 200;

/// Consecutive residual increases treated as divergence.
const DIVERGENCE_RUN: usize = 5;

/// `T(u) = u μ(γ(u))`.
pub fn tilt_t(sol: &GsSolution, u: &Element) -> Result<Element> {
    let g = sol.gamma(u)?;
    Ok(u * &g.mu())
}

/// `T_t(u) = u(e^{tγ(u)} - 1)/γ(u)`, so that `T_1 = T` and `T_t(u) = T(tu)`.
pub fn tilt_t_scaled(sol: &GsSolution, u: &Element, t: f64) -> Result<Element> {
    let g = sol.gamma(u)?;
    Ok(u * &g.map_spectral(|z| scalar::mu_t(z, t)))
}

/// `λ_u(t) = (e^{tγ(u)} - 1)/(e^{γ(u)} - 1)`, equal to `t` at spectral
/// points with `e^z = 1`.
pub fn lambda_scale(sol: &GsSolution, u: &Element, t: f64) -> Result<Element> {
    let g = sol.gamma(u)?;
    Ok(g.map_spectral(|z| scalar::lambda(z, t)))
}

/// `max_t ||N(T_t(u)) - λ_u(t) N(T(u))||` over the grid.
pub fn radiality_check(sol: &GsSolution, u: &Element, t_grid: &[f64]) -> Result<f64> {
    let rho = sol.rho_of()?;
    let n_t1 = sol.adjustor_with(&rho, &tilt_t(sol, u)?);
    let mut defect = 0.0_f64;
    for &t in t_grid {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::input("t_grid", "entries must be finite and non-negative"));
        }
        let lhs = sol.adjustor_with(&rho, &tilt_t_scaled(sol, u, t)?);
        let rhs = &lambda_scale(sol, u, t)? * &n_t1;
        defect = defect.max(lhs.dist(&rhs));
    }
    Ok(defect)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltInverseReport {
    pub u: Element,
    /// `norm(γ(u) - log(1 + γ(v)))`.
    pub log_identity_defect: f64,
    /// `norm(T(u) - v)`.
    pub roundtrip_residual: f64,
}

/// Closed-form inverse `u = v log(1 + γ(v))/γ(v)`.
pub fn tilt_inverse(sol: &GsSolution, v: &Element) -> Result<Element> {
    if !sol.is_omega_homogeneous() {
        return Err(Error::NotOmegaHomogeneous);
    }
    let g = sol.gamma(v)?;
    let one = Element::one(sol.algebra());
    if (&one + &g).spectral_points().into_iter().any(scalar::on_negative_axis) {
        return Err(Error::LogBranchViolation);
    }
    Ok(v * &g.map_spectral(scalar::log1p_over))
}

/// [`tilt_inverse`] together with its two self-checks.
pub fn tilt_inverse_report(sol: &GsSolution, v: &Element) -> Result<TiltInverseReport> {
    let u = tilt_inverse(sol, v)?;
    let g_v = sol.gamma(v)?;
    let log_term = g_v.map_spectral(scalar::log1p);
    let log_identity_defect = sol.gamma(&u)?.dist(&log_term);
    let roundtrip_residual = tilt_t(sol, &u)?.dist(v);
    Ok(TiltInverseReport {
        u,
        log_identity_defect,
        roundtrip_residual,
    })
}

/// Radius constants of the contraction argument for `||γ|| = gnorm`:
/// `δ = min{1, 1/(3||γ||e^{||γ||})}` and
/// `η = min{1, δ/2, δ/(2||γ||e^{||γ||})}`.
pub fn guarantee_radii(gnorm: f64) -> (f64, f64) {
    if gnorm == 0.0 {
        return (1.0, 0.5);
    }
    let k = gnorm * gnorm.exp();
    let delta = 1.0_f64.min(1.0 / (3.0 * k));
    let eta = 1.0_f64.min(delta / 2.0).min(delta / (2.0 * k));
    (delta, eta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltResult {
    pub u: Element,
    pub iterations: usize,
    /// `norm(v - T(u))`.
    pub final_residual: f64,
    /// Whether `norm(v) < η`, inside the region where convergence is proven.
    pub guaranteed: bool,
    pub eta: f64,
    /// Largest observed `||u_{n+1} - u_n|| / ||u_n - u_{n-1}||`, over steps
    /// whose denominator is still above rounding level.
    pub max_contraction_ratio: f64,
}

/// Solves `T(u) = v` by `u_{n+1} = v - u_n H(γ(u_n))`, `H(z) = (e^z - 1 - z)/z`,
/// starting from `u_0 = 0`.
///
/// Since `T(u) = u + uH(γ(u))`, the residual `v - T(u_n)` equals the step
/// `u_{n+1} - u_n`.
pub fn tilt_solve_fixed_point(sol: &GsSolution, v: &Element, max_iter: usize) -> Result<TiltResult> {
    sol.check_algebra(v)?;
    let gnorm = sol.gamma_operator_norm()?;
    let (_, eta) = guarantee_radii(gnorm);
    let guaranteed = v.norm() < eta;
    let floor = 1e3 * f64::EPSILON * v.norm().max(f64::MIN_POSITIVE);

    let step = |u: &Element| -> Result<Element> {
        let h = sol.gamma(u)?.map_spectral(scalar::h_kernel);
        Ok(v - &(u * &h))
    };

    let mut u = Element::zero(sol.algebra());
    let mut prev_step: Option<f64> = None;
    let mut residual = v.norm();
    let mut growth_run = 0;
    let mut max_ratio = 0.0_f64;
    for it in 0..max_iter {
        if residual < FIXED_POINT_TOL {
            return Ok(TiltResult {
                u,
                iterations: it,
                final_residual: residual,
                guaranteed,
                eta,
                max_contraction_ratio: max_ratio,
            });
        }
        let next = step(&u)?;
        if !next.is_finite() {
            break;
        }
        let step_len = next.dist(&u);
        if let Some(p) = prev_step {
            if p > floor {
                max_ratio = max_ratio.max(step_len / p);
            }
        }
        prev_step = Some(step_len);
        u = next;
        let r = tilt_t(sol, &u)?.dist(v);
        growth_run = if r > residual { growth_run + 1 } else { 0 };
        residual = r;
        if !residual.is_finite() || growth_run >= DIVERGENCE_RUN {
            return Err(Error::NoConvergence {
                iterations: it + 1,
                residual,
                guaranteed,
            });
        }
    }
    if residual < FIXED_POINT_TOL {
        return Ok(TiltResult {
            u,
            iterations: max_iter,
            final_residual: residual,
            guaranteed,
            eta,
            max_contraction_ratio: max_ratio,
        });
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
        guaranteed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `T(su)` grows without bound as `s → ∞`; `T(-su)` converges.
    PlusUnbounded,
    MinusUnbounded,
    /// `γ(u)` has no spectral point with non-zero real part.
    UnitNorm,
    /// `γ(u)` has spectral points of both signs, so both rays grow.
    BothUnbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnboundednessVerdict {
    pub direction: Direction,
    /// `-u/γ(u)` on the active coordinates, zero elsewhere.
    pub limit_point: Option<Element>,
    /// Coordinates (spectral slots) where `γ(u) != 0`.
    pub active: Vec<usize>,
    /// `norm(e^{γ(u)})`.
    pub exp_gamma_norm: f64,
    /// Active-coordinate norms of `T(s_max u)` and `T(-s_max u)`.
    pub plus_norm: f64,
    pub minus_norm: f64,
    /// Active-coordinate distance of the bounded ray at `s_max` from the limit.
    pub limit_defect: Option<f64>,
}

const ACTIVE_EPS: f64 = 1e-12;

fn active_slots(alg: &AlgebraDescriptor, g: &Element) -> Vec<usize> {
    if alg.is_componentwise() {
        (0..g.dim()).filter(|&i| g.coords()[i].abs() > ACTIVE_EPS).collect()
    } else if g.norm() > ACTIVE_EPS {
        vec![0, 1]
    } else {
        vec![]
    }
}

fn active_norm(alg: &AlgebraDescriptor, x: &Element, active: &[usize]) -> f64 {
    if active.is_empty() {
        return 0.0;
    }
    if alg.is_componentwise() {
        active.iter().fold(0.0_f64, |m, &i| m.max(x.coords()[i].abs()))
    } else {
        x.norm()
    }
}

/// Decides along which ray `s ↦ T(±su)` the tilt is unbounded, and checks
/// that the other ray approaches `-u/γ(u)`.
///
/// Coordinates with `γ(u) = 0` grow linearly in both directions and are
/// left out of the verdict.
pub fn unboundedness_direction(sol: &GsSolution, u: &Element, s_max: f64) -> Result<UnboundednessVerdict> {
    if !(s_max.is_finite() && s_max > 0.0) {
        return Err(Error::input("s_max", "must be positive"));
    }
    let alg = sol.algebra().clone();
    let g = sol.gamma(u)?;
    let active = active_slots(&alg, &g);
    let exp_gamma_norm = g.exp().norm();

    let re_parts: Vec<f64> = if alg.is_componentwise() {
        active.iter().map(|&i| g.coords()[i]).collect()
    } else if active.is_empty() {
        vec![]
    } else {
        vec![g.coords()[0]]
    };
    let plus = re_parts.iter().any(|&r| r > ACTIVE_EPS);
    let minus = re_parts.iter().any(|&r| r < -ACTIVE_EPS);
    let direction = match (plus, minus) {
        (true, true) => Direction::BothUnbounded,
        (true, false) => Direction::PlusUnbounded,
        (false, true) => Direction::MinusUnbounded,
        (false, false) => Direction::UnitNorm,
    };

    let t_plus = tilt_t(sol, &u.scale(s_max))?;
    let t_minus = tilt_t(sol, &u.scale(-s_max))?;
    let plus_norm = active_norm(&alg, &t_plus, &active);
    let minus_norm = active_norm(&alg, &t_minus, &active);

    let (limit_point, limit_defect) = match direction {
        Direction::PlusUnbounded | Direction::MinusUnbounded => {
            let limit = if alg.is_componentwise() {
                let mut c = vec![0.0; u.dim()];
                for &i in &active {
                    c[i] = -u.coords()[i] / g.coords()[i];
                }
                Element::new(alg.clone(), c)?
            } else {
                let q = -Complex64::new(u.coords()[0], u.coords()[1]) / Complex64::new(g.coords()[0], g.coords()[1]);
                Element::new(alg.clone(), vec![q.re, q.im])?
            };
            let bounded = if direction == Direction::PlusUnbounded {
                &t_minus
            } else {
                &t_plus
            };
            let defect = active_norm(&alg, &(bounded - &limit), &active);
            (Some(limit), Some(defect))
        }
        _ => (None, None),
    };
    Ok(UnboundednessVerdict {
        direction,
        limit_point,
        active,
        exp_gamma_norm,
        plus_norm,
        minus_norm,
        limit_defect,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub n: u64,
    pub m: u64,
    pub error: f64,
}

/// `(1 + z/n)^k - 1` with the logarithm when `1 + z/n` is off the negative
/// axis, by repeated squaring otherwise.
fn pow_m1(z: Complex64, n: f64, k: u64) -> Complex64 {
    let w = z / n;
    let base = Complex64::new(1.0, 0.0) + w;
    if scalar::on_negative_axis(base) {
        return base.powi(k as i32) - 1.0;
    }
    scalar::expm1(scalar::log1p(w) * k as f64)
}

/// Error of the finite-n ratio `((1 + a/n)^{m} - 1)/((1 + a/n)^n - 1)`,
/// `m = round(tn)`, against `(e^{ta} - 1)/(e^a - 1)` for `n = 10, 100, ...`
/// up to `n_max`.
///
/// At spectral points with `e^z = 1` both sides take the value of the
/// convention: `m/n` for the ratio, `t` for the limit.
pub fn ratio_limit_check(a: &Element, t: f64, n_max: u64) -> Result<Vec<RatioPoint>> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::input("t", "must be positive"));
    }
    if n_max < 10 {
        return Err(Error::input("n_max", "must be at least 10"));
    }
    let points = a.spectral_points();
    let mut out = Vec::new();
    let mut n: u64 = 10;
    while n <= n_max {
        let nf = n as f64;
        let m = (t * nf).round() as u64;
        let mut err = 0.0_f64;
        for &z in &points {
            let limit = scalar::lambda(z, t);
            let den = pow_m1(z, nf, n);
            let ratio = if den.norm() < scalar::LHOSPITAL_EPS {
                if scalar::expm1(z).norm() >= scalar::LHOSPITAL_EPS {
                    return Err(Error::NotInvertible { eps: INV_EPS });
                }
                Complex64::new(m as f64 / nf, 0.0)
            } else {
                pow_m1(z, nf, m) / den
            };
            err = err.max((ratio - limit).norm());
        }
        out.push(RatioPoint { n, m, error: err });
        n = match n.checked_mul(10) {
            Some(next) => next,
            None => break,
        };
    }
    Ok(out)
}
