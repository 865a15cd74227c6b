//! Solutions described by a triple `(𝒩, Λ, W)`: a subspace `𝒩`, a
//! multiplicative set `Λ` with `Λ𝒩 ⊆ 𝒩`, and a map `W` with
//! `W(λ) ∈ 𝒩 ⇔ λ = 1` and `W(λ₁λ₂) = W(λ₁) + λ₁W(λ₂) mod 𝒩`.
//! The solution is then `S(x) = λ` for `x = W(λ) mod 𝒩` and 0 elsewhere.
//!
//! `𝒩` is a coordinate subspace given by a basis and "mod 𝒩" is the
//! orthogonal projection onto its complement. `Λ` is a finite sample.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, Element};
use crate::error::{Error, Result};
use crate::solution::{DegenerateForm, GsSolution, Variant};
use crate::structure::RANK_RTOL;

/// Tolerance for `S(W(λ)) = λ` when extracting a right inverse.
const RANGE_TOL: f64 = 1e-9;

pub type WMap = Arc<dyn Fn(&Element) -> Element + Send + Sync>;

#[derive(Clone)]
pub struct WjTriple {
    algebra: AlgebraDescriptor,
    kernel_basis: Vec<Element>,
    lambda_samples: Vec<Element>,
    w: WMap,
}

impl fmt::Debug for WjTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WjTriple")
            .field("algebra", &self.algebra)
            .field("kernel_basis", &self.kernel_basis)
            .field("lambda_samples", &self.lambda_samples)
            .finish_non_exhaustive()
    }
}

fn orthonormalize(vs: &[Element]) -> Vec<Element> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut c = v.coords().to_vec();
        for q in &out {
            let dot: f64 = c.iter().zip(q).map(|(a, b)| a * b).sum();
            c.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
        }
        let n = c.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-12 {
            c.iter_mut().for_each(|a| *a /= n);
            out.push(c);
        }
    }
    out.into_iter().map(|c| Element::from_raw(vs[0].algebra(), c)).collect()
}

impl WjTriple {
    pub fn new(
        algebra: AlgebraDescriptor,
        kernel_basis: Vec<Element>,
        lambda_samples: Vec<Element>,
        w: WMap,
    ) -> Result<Self> {
        for e in kernel_basis.iter().chain(&lambda_samples) {
            if e.algebra() != &algebra {
                return Err(Error::InvalidTriple(format!("element outside {}", algebra)));
            }
        }
        if lambda_samples.is_empty() {
            return Err(Error::InvalidTriple("no lambda samples".into()));
        }
        if let Some(i) = lambda_samples.iter().position(|l| !l.is_invertible()) {
            return Err(Error::InvalidTriple(format!(
                "lambda sample {} is not invertible",
                i + 1
            )));
        }
        let kernel_basis = if kernel_basis.is_empty() {
            kernel_basis
        } else {
            orthonormalize(&kernel_basis)
        };
        Ok(Self {
            algebra,
            kernel_basis,
            lambda_samples,
            w,
        })
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn kernel_basis(&self) -> &[Element] {
        &self.kernel_basis
    }

    pub fn lambda_samples(&self) -> &[Element] {
        &self.lambda_samples
    }

    pub fn w(&self, lambda: &Element) -> Element {
        (self.w)(lambda)
    }

    /// Component of `x` orthogonal to `𝒩`.
    pub fn project_out(&self, x: &Element) -> Element {
        let mut c = x.coords().to_vec();
        for q in &self.kernel_basis {
            let dot: f64 = c.iter().zip(q.coords()).map(|(a, b)| a * b).sum();
            c.iter_mut().zip(q.coords()).for_each(|(a, b)| *a -= dot * b);
        }
        Element::from_raw(&self.algebra, c)
    }

    /// `norm` of `x mod 𝒩`.
    pub fn norm_mod(&self, x: &Element) -> f64 {
        self.project_out(x).norm()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WjCheck {
    /// `max norm(λn mod 𝒩)` over samples and basis vectors.
    pub closure_defect: f64,
    /// `norm(W(1) mod 𝒩)`.
    pub w_of_one: f64,
    /// 1-based index of a sample violating `W(λ) ∈ 𝒩 ⇔ λ = 1`.
    pub separation_violation: Option<usize>,
    /// `max norm(W(λ₁λ₂) - W(λ₁) - λ₁W(λ₂) mod 𝒩)` over all ordered pairs.
    pub cocycle_defect: f64,
    pub passed: bool,
}

/// Checks the three triple conditions on the sample set.
pub fn wj_check(t: &WjTriple, tol: f64) -> WjCheck {
    let one = Element::one(&t.algebra);
    let mut closure_defect = 0.0_f64;
    for l in &t.lambda_samples {
        for n in &t.kernel_basis {
            closure_defect = closure_defect.max(t.norm_mod(&(l * n)));
        }
    }
    let w_of_one = t.norm_mod(&t.w(&one));
    let separation_violation = t.lambda_samples.iter().position(|l| {
        let is_one = l.dist(&one) < tol;
        let in_kernel = t.norm_mod(&t.w(l)) < tol;
        is_one != in_kernel
    });
    let ws: Vec<Element> = t.lambda_samples.iter().map(|l| t.w(l)).collect();
    let mut cocycle_defect = 0.0_f64;
    for (l1, w1) in t.lambda_samples.iter().zip(&ws) {
        for (l2, w2) in t.lambda_samples.iter().zip(&ws) {
            let lhs = t.w(&(l1 * l2));
            let rhs = w1 + &(l1 * w2);
            cocycle_defect = cocycle_defect.max(t.norm_mod(&(&lhs - &rhs)));
        }
    }
    let bad = |v: f64| v.is_nan() || v >= tol;
    let passed = !bad(closure_defect) && !bad(w_of_one) && separation_violation.is_none() && !bad(cocycle_defect);
    WjCheck {
        closure_defect,
        w_of_one,
        separation_violation: separation_violation.map(|i| i + 1),
        cocycle_defect,
        passed,
    }
}

pub fn wj_verify(t: &WjTriple, tol: f64) -> bool {
    wj_check(t, tol).passed
}

/// The map `x ↦ λ` on the covered set `{W(λ) + 𝒩}`, 0 elsewhere.
#[derive(Clone, Debug)]
pub struct WjOracle {
    triple: WjTriple,
    /// `(λ, W(λ) mod 𝒩)`.
    table: Vec<(Element, Element)>,
    tol: f64,
}

impl WjOracle {
    fn insert(&mut self, l: Element) {
        let key = self.triple.project_out(&self.triple.w(&l));
        self.table.push((l, key));
    }

    /// Adds every product `λ_i λ_j` of samples, so that the operation of two
    /// covered points stays covered.
    pub fn with_pairwise_products(mut self) -> Self {
        let samples = self.triple.lambda_samples.clone();
        for a in &samples {
            for b in &samples {
                self.insert(a * b);
            }
        }
        self
    }

    pub fn triple(&self) -> &WjTriple {
        &self.triple
    }

    /// `λ` with `x = W(λ) mod 𝒩`, if any.
    pub fn lookup(&self, x: &Element) -> Option<&Element> {
        let px = self.triple.project_out(x);
        self.table
            .iter()
            .find(|(_, key)| key.dist(&px) < self.tol)
            .map(|(l, _)| l)
    }

    pub fn eval(&self, x: &Element) -> Element {
        self.lookup(x)
            .cloned()
            .unwrap_or_else(|| Element::zero(&self.triple.algebra))
    }

    /// `max ||S(x + S(x)y) - S(x)S(y)||` over pairs `x = W(λ_i)`,
    /// `y = W(λ_j)` of samples whose operation lands in the covered set,
    /// with the number of such pairs.
    pub fn covered_pair_residual(&self) -> (f64, usize) {
        let mut worst = 0.0_f64;
        let mut count = 0;
        let samples = &self.triple.lambda_samples;
        for a in samples {
            let x = self.triple.w(a);
            let sx = self.eval(&x);
            for b in samples {
                let y = self.triple.w(b);
                let xy = &x + &(&sx * &y);
                if let Some(l) = self.lookup(&xy) {
                    count += 1;
                    worst = worst.max(l.dist(&(&sx * &self.eval(&y))));
                }
            }
        }
        (worst, count)
    }
}

/// Builds the sampled solution of a triple; fails unless the triple
/// passes [`wj_check`] at `tol`.
pub fn wj_build_s(t: &WjTriple, tol: f64) -> Result<WjOracle> {
    let check = wj_check(t, tol);
    if !check.passed {
        return Err(Error::InvalidTriple(format!(
            "closure {:e}, W(1) {:e}, separation {:?}, cocycle {:e}",
            check.closure_defect, check.w_of_one, check.separation_violation, check.cocycle_defect
        )));
    }
    let mut oracle = WjOracle {
        triple: t.clone(),
        table: Vec::with_capacity(t.lambda_samples.len()),
        tol,
    };
    for l in t.lambda_samples.clone() {
        oracle.insert(l);
    }
    Ok(oracle)
}

fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let smax = m.clone().svd(false, false).singular_values.max();
    if smax == 0.0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    m.clone()
        .pseudo_inverse(RANK_RTOL * smax)
        .expect("non-negative threshold")
}

fn apply(m: &DMatrix<f64>, alg: &AlgebraDescriptor, v: &[f64]) -> Element {
    let r = m * DVector::from_column_slice(v);
    Element::from_raw(alg, r.iter().copied().collect())
}

/// A right inverse of `S` in closed form per variant.
fn right_inverse(sol: &GsSolution) -> Result<WMap> {
    let alg = sol.algebra().clone();
    let map: WMap = match sol.variant() {
        Variant::Canonical { .. }
        | Variant::Partition(_)
        | Variant::Affine { .. }
        | Variant::ComplexReIm { .. }
        | Variant::IdempotentBuilt { .. } => {
            // S(x) = 1 + Jx
            let jp = pinv(sol.derivative_matrix()?);
            Arc::new(move |l: &Element| {
                let c: Vec<f64> = l
                    .coords()
                    .iter()
                    .zip(Element::one(&alg).coords())
                    .map(|(a, b)| a - b)
                    .collect();
                apply(&jp, &alg, &c)
            })
        }
        Variant::Exponential { exponents } => {
            let gp = pinv(exponents.matrix());
            Arc::new(move |l: &Element| {
                let logs: Vec<f64> = l.coords().iter().map(|v| v.ln()).collect();
                apply(&gp, &alg, &logs)
            })
        }
        Variant::DegenerateExp {
            rho,
            gamma_exp,
            axis,
            form,
        } => {
            let (rho, g, a, form) = (*rho, *gamma_exp, *axis, *form);
            Arc::new(move |l: &Element| {
                let la = l.coords()[a];
                let lo = l.coords()[1 - a];
                let xa = match form {
                    DegenerateForm::OneExp if g != 0.0 => lo.ln() / g,
                    DegenerateForm::OneExp => 0.0,
                    DegenerateForm::AffinePower if rho != 0.0 => (la - 1.0) / rho,
                    DegenerateForm::AffinePower => 0.0,
                    DegenerateForm::PurePower => la,
                };
                let mut c = vec![0.0; 2];
                c[a] = xa;
                Element::from_raw(&alg, c)
            })
        }
    };
    Ok(map)
}

/// The triple of a solution: `𝒩` its kernel, `Λ` the given samples of its
/// range, `W` a closed-form right inverse.
pub fn wj_extract(sol: &GsSolution, lambda_samples: Vec<Element>) -> Result<WjTriple> {
    let w = right_inverse(sol)?;
    for l in &lambda_samples {
        sol.check_algebra(l)?;
        let x = w(l);
        let back = sol.eval(&x);
        if !back.is_finite() || back.dist(l) > RANGE_TOL * l.norm().max(1.0) {
            return Err(Error::NotInRange);
        }
    }
    WjTriple::new(sol.algebra().clone(), sol.kernel_basis()?, lambda_samples, w)
}
