//! Roots of `e^ω = 1 + ω`.
//!
//! Writing `ω = x + iy`, the equation splits into `e^x cos y = 1 + x` and
//! `e^x sin y = y`. Squaring and adding gives `y² = e^{2x} - (1+x)²`, so on
//! the curve `y(x)` it remains to solve `sin y = e^{-x} y` with `cos y` of
//! the same sign as `1 + x`. Sign changes of `sin y - e^{-x}y` are bracketed
//! on a fine grid, bisected, and polished by Newton on the complex equation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::scalar;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 50;
/// Accepted `|e^ω - 1 - ω|`, relative to `max(1, |ω|)`: the terms are of
/// size `|ω|` and cancel.
const RESIDUAL_TOL: f64 = 1e-12;
/// Largest change of `y` allowed per grid step.
const MAX_DY: f64 = 1e-2;
/// Beyond this `e^{2x}` overflows.
const X_LIMIT: f64 = 300.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StSolution {
    pub x: f64,
    pub y: f64,
    /// `floor(y / 2π)`.
    pub branch: i64,
    /// `|e^ω - 1 - ω|`.
    pub residual: f64,
}

impl StSolution {
    pub fn omega(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// `y(x) = sqrt(e^{2x} - (1+x)²)`, or `None` where the radicand is not
/// positive.
pub fn y_of(x: f64) -> Option<f64> {
    // e^{2x} - (1+x)^2 = (e^{2x} - 1) - x(2 + x), accurate near 0
    let r = (2.0 * x).exp_m1() - x * (2.0 + x);
    (r > 0.0).then(|| r.sqrt())
}

fn g(x: f64, y: f64) -> f64 {
    y.sin() - (-x).exp() * y
}

fn st_residual(w: Complex64) -> f64 {
    (scalar::expm1(w) - w).norm()
}

fn newton(mut w: Complex64) -> Complex64 {
    for _ in 0..NEWTON_MAX_ITER {
        let f = scalar::expm1(w) - w;
        let df = scalar::expm1(w);
        if df.norm() == 0.0 {
            break;
        }
        let dw = f / df;
        w -= dw;
        if dw.norm() <= NEWTON_TOL * w.norm().max(1.0) {
            break;
        }
    }
    w
}

fn refine(mut a: f64, mut b: f64) -> Option<StSolution> {
    let (mut ya, _) = (y_of(a)?, y_of(b)?);
    let mut ga = g(a, ya);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let ym = y_of(m)?;
        let gm = g(m, ym);
        if gm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ya = ym;
            ga = gm;
        } else {
            b = m;
        }
    }
    let x = 0.5 * (a + b);
    let y = y_of(x).unwrap_or(ya);
    // the other half of the equation: cos y and 1 + x share a sign
    if y.cos() * (1.0 + x) <= 0.0 {
        return None;
    }
    let w = newton(Complex64::new(x, y));
    let residual = st_residual(w);
    if !(residual < RESIDUAL_TOL * w.norm().max(1.0) && w.im > 0.0) {
        return None;
    }
    Some(StSolution {
        x: w.re,
        y: w.im,
        branch: (w.im / std::f64::consts::TAU).floor() as i64,
        residual,
    })
}

fn step_at(x: f64, y: f64, step: f64) -> f64 {
    // dy/dx = (e^{2x} - (1+x))/y
    let slope = (((2.0 * x).exp() - (1.0 + x)) / y).abs();
    if slope * step > MAX_DY {
        (MAX_DY / slope).max(step * 1e-9)
    } else {
        step
    }
}

fn scan_with(lo: f64, hi: f64, step: f64, limit: Option<usize>) -> Vec<StSolution> {
    let mut out: Vec<StSolution> = Vec::new();
    let hi = hi.min(X_LIMIT);
    let mut x = lo;
    let mut prev: Option<(f64, f64)> = None;
    while x <= hi {
        let Some(y) = y_of(x) else {
            prev = None;
            x += step;
            continue;
        };
        let gx = g(x, y);
        if let Some((px, pg)) = prev {
            if (pg > 0.0) != (gx > 0.0) || gx == 0.0 {
                if let Some(root) = refine(px, x) {
                    let dup = out
                        .last()
                        .is_some_and(|r| (r.omega() - root.omega()).norm() < 1e-8 * root.y.max(1.0));
                    if !dup {
                        out.push(root);
                        if limit.is_some_and(|n| out.len() >= n) {
                            return out;
                        }
                    }
                }
            }
        }
        prev = Some((x, gx));
        x += step_at(x, y, step);
    }
    out
}

/// All roots with `Re ω` in `[lo, hi]` and `Im ω > 0` found on a grid of
/// at most `step` in `x` (refined where `y(x)` moves fast).
pub fn st_scan(lo: f64, hi: f64, step: f64) -> Vec<StSolution> {
    scan_with(lo, hi, step, None)
}

/// The first `n_roots` roots with positive real part, ordered by `y`.
pub fn st_roots(n_roots: usize) -> Vec<StSolution> {
    if n_roots == 0 {
        return Vec::new();
    }
    scan_with(1e-3, X_LIMIT, 1e-3, Some(n_roots))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiRoot {
    pub xi: f64,
    /// `|e^{-ξ} - (ξ - 1)|`.
    pub residual: f64,
}

/// The root `ξ > 1` of `e^{-ξ} = ξ - 1`, where `y(-ξ) = 0`.
pub fn xi_root() -> XiRoot {
    let f = |x: f64| (-x).exp() - (x - 1.0);
    let (mut a, mut b) = (1.0_f64, 2.0_f64);
    for _ in 0..40 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..NEWTON_MAX_ITER {
        let dx = f(x) / (-(-x).exp() - 1.0);
        x -= dx;
        if dx.abs() <= NEWTON_TOL * x {
            break;
        }
    }
    XiRoot {
        xi: x,
        residual: f(x).abs(),
    }
}
