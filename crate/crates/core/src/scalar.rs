//! Scalar kernels of the functional calculus.
//!
//! Every element-valued transcendental map in this crate is evaluated one
//! spectral point at a time through these functions. Real arguments (zero
//! imaginary part) take the `f64::exp_m1` / `f64::ln_1p` paths so that the
//! Hadamard algebras never pick up spurious imaginary rounding.

use num_complex::Complex64;

/// Below this modulus the ratio kernels switch to truncated Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-5;

/// Spectral points closer than this to a removable singularity take the
/// L'Hospital value.
pub const LHOSPITAL_EPS: f64 = 1e-12;

/// Terms kept in the small-argument series.
const SERIES_TERMS: usize = 8;

#[inline]
fn is_real(z: Complex64) -> bool {
    z.im == 0.0
}

/// `e^z - 1` without cancellation near 0.
pub fn expm1(z: Complex64) -> Complex64 {
    if is_real(z) {
        return Complex64::new(z.re.exp_m1(), 0.0);
    }
    let em1 = z.re.exp_m1();
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    // e^x cos y - 1 = (e^x - 1) cos y + (cos y - 1)
    Complex64::new(em1 * c - 2.0 * half * half, z.re.exp() * s)
}

/// Principal `log(1 + z)`; callers check the branch cut.
pub fn log1p(z: Complex64) -> Complex64 {
    if is_real(z) && z.re > -1.0 {
        return Complex64::new(z.re.ln_1p(), 0.0);
    }
    let (x, y) = (z.re, z.im);
    // |1+z|^2 = 1 + (2x + x^2 + y^2)
    let re = 0.5 * (2.0 * x + x * x + y * y).ln_1p();
    Complex64::new(re, y.atan2(1.0 + x))
}

/// `(e^z - 1)/z`, equal to 1 at `z = 0`.
pub fn mu(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_THRESHOLD {
        // sum_{k>=0} z^k/(k+1)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = term;
        for k in 1..SERIES_TERMS {
            term = term * z / (k as f64 + 1.0);
            acc += term;
        }
        return acc;
    }
    expm1(z) / z
}

/// `(e^z - 1 - z)/z = z/2! + z^2/3! + ...`.
pub fn h_kernel(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_THRESHOLD {
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=SERIES_TERMS {
            term = term * z / (k as f64 + 1.0);
            acc += term;
        }
        return acc;
    }
    (expm1(z) - z) / z
}

/// `log(1 + z)/z`, equal to 1 at `z = 0`.
pub fn log1p_over(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_THRESHOLD {
        // sum_{k>=0} (-z)^k/(k+1)
        let mut pow = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..SERIES_TERMS {
            acc += pow / (k as f64 + 1.0);
            pow *= -z;
        }
        return acc;
    }
    log1p(z) / z
}

/// `(e^{tz} - 1)/(e^z - 1)`, equal to `t` wherever `e^z = 1`.
pub fn lambda(z: Complex64, t: f64) -> Complex64 {
    let den = expm1(z);
    if den.norm() < LHOSPITAL_EPS {
        return Complex64::new(t, 0.0);
    }
    expm1(z * t) / den
}

/// `(e^{tz} - 1)/z`, equal to `t` at `z = 0`.
pub fn mu_t(z: Complex64, t: f64) -> Complex64 {
    if z.norm() < SERIES_THRESHOLD {
        return mu(z * t) * t;
    }
    expm1(z * t) / z
}

/// True when `z` lies on the closed negative real axis (including 0).
pub fn on_negative_axis(z: Complex64) -> bool {
    z.im.abs() <= LHOSPITAL_EPS * z.re.abs().max(1.0) && z.re <= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn mu_at_zero_is_one() {
        assert_eq!(mu(r(0.0)), r(1.0));
    }

    #[test]
    fn mu_of_one() {
        assert!((mu(r(1.0)).re - (std::f64::consts::E - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn series_and_direct_agree_at_switch() {
        for &x in &[SERIES_THRESHOLD, -SERIES_THRESHOLD] {
            let below = mu(r(x * (1.0 - 1e-9)));
            let above = r(x.exp_m1() / x);
            assert!((below - above).norm() < 1e-12);
            let hb = h_kernel(r(x * (1.0 - 1e-9)));
            let ha = r((x.exp_m1() - x) / x);
            assert!((hb - ha).norm() < 1e-12);
            let lb = log1p_over(r(x * (1.0 - 1e-9)));
            let la = r(x.ln_1p() / x);
            assert!((lb - la).norm() < 1e-12);
        }
        let z = Complex64::new(0.6e-5, 0.8e-5);
        let direct = expm1(z) / z;
        assert!((mu(z * (1.0 - 1e-9)) - direct).norm() < 1e-12);
    }

    #[test]
    fn complex_expm1_matches_exp() {
        let z = Complex64::new(0.3, 2.0);
        assert!((expm1(z) - (z.exp() - 1.0)).norm() < 1e-15);
        let tiny = Complex64::new(1e-9, 2e-9);
        assert!((expm1(tiny) - tiny).norm() < 1e-17);
    }

    #[test]
    fn complex_log1p_inverts_expm1() {
        let z = Complex64::new(0.4, -0.7);
        assert!((expm1(log1p(z)) - z).norm() < 1e-15);
    }

    #[test]
    fn lambda_conventions() {
        assert_eq!(lambda(r(0.0), 2.5), r(2.5));
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        assert!((lambda(two_pi_i, 0.7) - r(0.7)).norm() < 1e-15);
        let e = std::f64::consts::E;
        assert!((lambda(r(1.0), 2.0).re - (e * e - 1.0) / (e - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn negative_axis() {
        assert!(on_negative_axis(r(0.0)));
        assert!(on_negative_axis(r(-2.0)));
        assert!(!on_negative_axis(r(1e-300)));
        assert!(!on_negative_axis(Complex64::new(-1.0, 1e-3)));
    }
}
