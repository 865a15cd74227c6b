//! Sampled verification of the group, Goldie and structural identities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Element, INV_EPS};
use crate::error::{Error, Result};
use crate::sampling;
use crate::scalar;
use crate::solution::{GsSolution, GROUP_EPS};

/// Largest tolerated rejection share before sampling gives up.
const MAX_REJECT_FRACTION: f64 = 0.99;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldieResidualReport {
    /// `max ||S(x ∘ y) - S(x)S(y)||`.
    pub max_gs_residual: f64,
    /// `max ||N(x ∘ y) - N(x) - S(x)N(y)||`.
    pub max_goldie_residual: f64,
    /// Pairs that passed the group-membership filter.
    pub samples_tested: usize,
    pub rejected: usize,
    pub worst_pair: Option<(Element, Element)>,
}

impl GoldieResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_gs_residual < tol && self.max_goldie_residual < tol
    }
}

fn pair_residuals(sol: &GsSolution, rho: &Element, x: &Element, y: &Element) -> Option<(f64, f64)> {
    let sx = sol.eval(x);
    let sy = sol.eval(y);
    if !sx.is_invertible_within(GROUP_EPS) || !sy.is_invertible_within(GROUP_EPS) {
        return None;
    }
    let xy = sol.circle_op_unchecked(x, y);
    let sxy = sol.eval(&xy);
    if !sxy.is_finite() {
        return None;
    }
    let gs = (&sxy - &(&sx * &sy)).norm();
    let nxy = sol.adjustor_with(rho, &xy);
    let nx = sol.adjustor_with(rho, x);
    let ny = sol.adjustor_with(rho, y);
    let goldie = (&(&nxy - &nx) - &(&sx * &ny)).norm();
    Some((gs, goldie))
}

/// Samples `n_samples` pairs uniformly in the coordinate box of the given
/// radius, keeps those with `S(x)`, `S(y)` invertible, and records the max
/// residuals of the functional equation and of the Goldie equation for `N`.
///
/// The result depends only on `(n_samples, seed, radius)`, not on the
/// number of worker threads.
pub fn verify_gs(sol: &GsSolution, n_samples: usize, seed: u64, radius: f64) -> Result<GoldieResidualReport> {
    if n_samples == 0 {
        return Err(Error::input("samples", "must be at least 1"));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::input("box_radius", "must be positive"));
    }
    let alg = sol.algebra();
    let mut rng = sampling::seeded_rng(seed);
    let pairs: Vec<(Element, Element)> = (0..n_samples)
        .map(|_| {
            let x = sampling::sample_box(&mut rng, alg, radius);
            let y = sampling::sample_box(&mut rng, alg, radius);
            (x, y)
        })
        .collect();
    // ρ only enters N, and the Goldie residual is defined for any ρ
    let one = Element::one(alg);
    let rho = &sol.eval(&one) - &one;
    let results: Vec<Option<(f64, f64)>> = pairs.par_iter().map(|(x, y)| pair_residuals(sol, &rho, x, y)).collect();

    let mut report = GoldieResidualReport {
        max_gs_residual: 0.0,
        max_goldie_residual: 0.0,
        samples_tested: 0,
        rejected: 0,
        worst_pair: None,
    };
    let mut worst = None;
    for (i, r) in results.iter().enumerate() {
        match r {
            None => report.rejected += 1,
            Some((gs, goldie)) => {
                report.samples_tested += 1;
                if worst.is_none() || *gs > report.max_gs_residual {
                    report.max_gs_residual = *gs;
                    worst = Some(i);
                }
                report.max_goldie_residual = report.max_goldie_residual.max(*goldie);
            }
        }
    }
    if report.samples_tested == 0 || report.rejected as f64 > MAX_REJECT_FRACTION * n_samples as f64 {
        return Err(Error::DomainExhausted {
            rejected: report.rejected,
            total: n_samples,
        });
    }
    report.worst_pair = worst.map(|i| pairs[i].clone());
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// `n(x) = S(x) - 1 - γ(x)`.
    pub n_x: Element,
    /// `m(x) = S(x) - 1 - γ(1)x`.
    pub m_x: Element,
    /// Norms of `⟨γ(x), n(x)⟩`, `⟨γ(x), n(x)⟩_γ`, `⟨γ(x), m(x)⟩`,
    /// `⟨γ(1)x, m(x)⟩_γ` with `⟨a,b⟩ = γ(ab)` and `⟨a,b⟩_γ = γ(aγ(b))`.
    pub orth_defects: [f64; 4],
}

/// Splits `S(x) - 1` into its linear part and remainder two ways and
/// measures the algebra-valued orthogonality forms between them.
pub fn decomposition_check(sol: &GsSolution, x: &Element) -> Result<DecompositionReport> {
    sol.check_algebra(x)?;
    let one = Element::one(sol.algebra());
    let gamma = |v: &Element| sol.gamma(v);
    let s1 = &sol.eval(x) - &one;
    let gx = gamma(x)?;
    let g1x = &gamma(&one)? * x;
    let n_x = &s1 - &gx;
    let m_x = &s1 - &g1x;
    let form = |a: &Element, b: &Element| gamma(&(a * b)).map(|v| v.norm());
    let form_g = |a: &Element, b: &Element| -> Result<f64> { Ok(gamma(&(a * &gamma(b)?))?.norm()) };
    let orth_defects = [
        form(&gx, &n_x)?,
        form_g(&gx, &n_x)?,
        form(&gx, &m_x)?,
        form_g(&g1x, &m_x)?,
    ];
    Ok(DecompositionReport { n_x, m_x, orth_defects })
}

/// `max_{0 ≤ k ≤ k_max} ||γ(uγ(u)^k) - γ(u)^{k+1}||`.
pub fn check_omega_homogeneity(sol: &GsSolution, u: &Element, k_max: u32) -> Result<f64> {
    let g = sol.gamma(u)?;
    let mut pow = Element::one(sol.algebra());
    let mut defect = 0.0_f64;
    for _ in 0..=k_max {
        let lhs = sol.gamma(&(u * &pow))?;
        pow = &pow * &g;
        defect = defect.max(lhs.dist(&pow));
    }
    Ok(defect)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub b: Element,
    pub s_of_b: Element,
}

/// `b = a(1 - S(a))^{-1}`, for which `S(b) = 0` whenever `S` is defined on
/// all of the algebra.
pub fn dichotomy_check(sol: &GsSolution, a: &Element) -> Result<DichotomyReport> {
    sol.check_algebra(a)?;
    let one = Element::one(sol.algebra());
    let denom = &one - &sol.eval(a);
    let b = a.div(&denom)?;
    let s_of_b = sol.eval(&b);
    Ok(DichotomyReport { b, s_of_b })
}

/// Checks `g(s) ∘_ρ g(t) = g(s + t)` over all grid pairs, where
/// `g(t) = ρ^{-1}(e^{tρ} - 1)` and `x ∘_ρ y = x + (1 + ρx)y`.
pub fn popa_isomorphism_check(rho: &Element, t_grid: &[f64]) -> Result<f64> {
    if !rho.is_invertible() {
        return Err(Error::NotInvertible { eps: INV_EPS });
    }
    let one = Element::one(rho.algebra());
    let g = |t: f64| rho.map_spectral(|z| scalar::mu_t(z, t));
    let mut defect = 0.0_f64;
    for &s in t_grid {
        let gs = g(s);
        let s_gs = &one + &(rho * &gs);
        for &t in t_grid {
            let lhs = &gs + &(&s_gs * &g(t));
            defect = defect.max(lhs.dist(&g(s + t)));
        }
    }
    Ok(defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraDescriptor;
    use crate::solution::DegenerateForm;
    use crate::structure::{PartitionSpec, SigmaMatrix};
    use std::f64::consts::E;

    fn h(d: usize) -> AlgebraDescriptor {
        AlgebraDescriptor::hadamard(d).unwrap()
    }

    fn el(c: &[f64]) -> Element {
        Element::new(h(c.len()), c.to_vec()).unwrap()
    }

    #[test]
    fn canonical_is_exact() {
        let s = GsSolution::canonical(el(&[1.0, 1.0]));
        let r = verify_gs(&s, 10_000, 7, 0.4).unwrap();
        assert!(r.max_gs_residual < 1e-12);
        assert_eq!(r.samples_tested + r.rejected, 10_000);
    }

    #[test]
    fn exponential_triple_passes() {
        let g = SigmaMatrix::from_rows(&[vec![0.0; 3], vec![0.0; 3], vec![1.0, 1.0, 0.0]]).unwrap();
        let s = GsSolution::exponential(g).unwrap();
        assert!(verify_gs(&s, 10_000, 1, 0.4).unwrap().max_gs_residual < 1e-10);
    }

    #[test]
    fn violated_sigma_fails() {
        // at x = y = (0.1, 0.1): S(x) = (1.3, 1.7), x∘y = (0.23, 0.27),
        // S(x∘y)_1 = 1 + 0.23 + 0.54 = 1.77 against 1.3^2 = 1.69
        let m = SigmaMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let s = GsSolution::affine_candidate(m);
        let x = el(&[0.1, 0.1]);
        let xy = s.circle_op(&x, &x).unwrap();
        let lhs = s.eval(&xy);
        let rhs = &s.eval(&x) * &s.eval(&x);
        assert!((lhs.coords()[0] - 1.77).abs() < 1e-12 && (rhs.coords()[0] - 1.69).abs() < 1e-12);
        assert!(verify_gs(&s, 10_000, 7, 0.4).unwrap().max_gs_residual > 1e-3);
    }

    #[test]
    fn pure_power_is_reported_honestly() {
        let s = GsSolution::degenerate_exp(DegenerateForm::PurePower, 0.0, 2.0, 0).unwrap();
        let r = verify_gs(&s, 2_000, 3, 0.4).unwrap();
        assert!(r.rejected > 0);
        assert!(r.max_gs_residual > 1e-3);
    }

    #[test]
    fn exhausted_domain() {
        let s = GsSolution::degenerate_exp(DegenerateForm::PurePower, 0.0, 1.0, 0).unwrap();
        let r = verify_gs(&s, 100, 3, 0.4).unwrap();
        assert!(r.rejected > 20 && r.rejected < 80);
        assert_eq!(
            verify_gs(&s, 100, 3, 1e-10),
            Err(Error::DomainExhausted {
                rejected: 100,
                total: 100
            })
        );
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let s = GsSolution::degenerate_exp(DegenerateForm::AffinePower, 1.3, 0.7, 1).unwrap();
        let a = verify_gs(&s, 5_000, 11, 0.4).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| verify_gs(&s, 5_000, 11, 0.4).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn decomposition_examples() {
        let c = GsSolution::canonical(el(&[0.5, -1.0]));
        let r = decomposition_check(&c, &el(&[0.3, 0.2])).unwrap();
        assert!(r.n_x.norm() < 1e-15);
        assert!(r.m_x.norm() < 1e-15);
        assert!(r.orth_defects.iter().all(|&d| d < 1e-15));

        let d = GsSolution::degenerate_exp(DegenerateForm::OneExp, 0.0, 1.0, 0).unwrap();
        let r = decomposition_check(&d, &el(&[1.0, 0.0])).unwrap();
        assert!((r.n_x.coords()[1] - (E - 2.0)).abs() < 1e-15 && r.n_x.coords()[0] == 0.0);

        let p = GsSolution::partition(
            h(2),
            PartitionSpec::from_one_based(vec![vec![1, 2]], vec![1.0, 2.0]).unwrap(),
        )
        .unwrap();
        assert!(decomposition_check(&p, &el(&[0.7, -0.1])).unwrap().n_x.norm() < 1e-15);
    }

    #[test]
    fn omega_homogeneity_examples() {
        let d = GsSolution::degenerate_exp(DegenerateForm::OneExp, 0.0, 1.0, 0).unwrap();
        // uγ(u) = (0, 0) so γ(uγ(u)) = 0, while γ(u)^2 = (0, 1)
        assert_eq!(check_omega_homogeneity(&d, &el(&[1.0, 0.0]), 5).unwrap(), 1.0);
        assert_eq!(check_omega_homogeneity(&d, &el(&[0.3, 0.4]), 0).unwrap(), 0.0);
        let p = GsSolution::partition(
            h(2),
            PartitionSpec::from_one_based(vec![vec![1, 2]], vec![0.7, -0.4]).unwrap(),
        )
        .unwrap();
        assert!(check_omega_homogeneity(&p, &el(&[0.9, 0.6]), 5).unwrap() < 1e-12);
    }

    #[test]
    fn dichotomy_examples() {
        let p = GsSolution::partition(
            h(2),
            PartitionSpec::from_one_based(vec![vec![1, 2]], vec![1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let r = dichotomy_check(&p, &el(&[1.0, 0.0])).unwrap();
        assert_eq!(r.b.coords(), &[-1.0, 0.0]);
        assert_eq!(r.s_of_b.coords(), &[0.0, 0.0]);

        let c = GsSolution::canonical(el(&[1.0, 1.0]));
        let r = dichotomy_check(&c, &el(&[1.0, 1.0])).unwrap();
        assert_eq!(r.b.coords(), &[-1.0, -1.0]);
        assert_eq!(r.s_of_b.norm(), 0.0);

        let k = p.kernel_basis().unwrap()[0].clone();
        assert!(matches!(dichotomy_check(&p, &k), Err(Error::NotInvertible { .. })));
    }

    #[test]
    fn popa_isomorphism_examples() {
        let one = el(&[1.0]);
        assert_eq!(popa_isomorphism_check(&one, &[0.0]).unwrap(), 0.0);
        assert!(popa_isomorphism_check(&one, &[1.0]).unwrap() < 1e-14);
        assert!(popa_isomorphism_check(&el(&[1.0, 2.0]), &[-1.0, 0.0, 0.5, 1.0]).unwrap() < 1e-12);
        assert!(matches!(
            popa_isomorphism_check(&el(&[1.0, 0.0]), &[0.0]),
            Err(Error::NotInvertible { .. })
        ));
    }
}
