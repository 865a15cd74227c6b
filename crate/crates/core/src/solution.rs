//! Continuous solutions of `S(x + S(x)y) = S(x)S(y)` and the Popa group
//! operation `x ∘ y = x + S(x)y` they induce.

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::algebra::{AlgebraDescriptor, AlgebraKind, Element};
use crate::error::{Error, Result};
use crate::structure::{self, PartitionSpec, SigmaMatrix};

/// Group-membership threshold on the spectral modulus of `S(x)`.
pub const GROUP_EPS: f64 = 1e-9;

/// `x ∈ 𝒩` when `norm(S(x) - 1) < KERNEL_TOL`.
pub const KERNEL_TOL: f64 = 1e-9;

/// Orthogonality tolerance for idempotent families.
pub const IDEMPOTENT_TOL: f64 = 1e-12;

/// The univariate shapes on `R^2`, written with `a` the driving axis and
/// `o` the other one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegenerateForm {
    /// `S_a = 1`, `S_o = e^{γ x_a}`.
    #[serde(rename = "One_Exp")]
    OneExp,
    /// `S_a = 1 + ρ x_a`, `S_o = (1 + ρ x_a)^γ`.
    #[serde(rename = "Affine_Power")]
    AffinePower,
    /// `S_a = x_a`, `S_o = x_a^γ`, defined for `x_a > 0` only.
    #[serde(rename = "Pure_Power")]
    PurePower,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Variant {
    /// `S(x) = 1 + ρx`.
    Canonical { rho: Element },
    /// `S_i(x) = 1 + Σ_{k ∈ part(i)} ρ_k x_k` on a componentwise algebra.
    Partition(PartitionSpec),
    DegenerateExp {
        rho: f64,
        gamma_exp: f64,
        /// Zero-based driving axis.
        axis: usize,
        form: DegenerateForm,
    },
    /// `S_k(x) = exp((Gx)_k)` where `G_kj != 0` forces row `j` of `G` to vanish.
    Exponential { exponents: SigmaMatrix },
    /// `S(x) = 1 + Σx` on `R^d` for an arbitrary matrix. Solves the equation
    /// only when `Σ` has the partition structure; kept as a candidate so
    /// that violations can be measured.
    Affine { sigma: SigmaMatrix },
    /// `S(z) = 1 + a Re z + b Im z` on `C`.
    ComplexReIm { a: f64, b: f64 },
    /// `S(x) = 1 + Σ_i σ(e_i x) e_i` for orthogonal idempotents `e_i` and
    /// the coordinate functional `σ(z) = Σ_k sigma_k z_k`.
    IdempotentBuilt { idempotents: Vec<Element>, sigma: Vec<f64> },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Canonical { .. } => "Canonical",
            Variant::Partition(_) => "Partition",
            Variant::DegenerateExp { .. } => "DegenerateExp",
            Variant::Exponential { .. } => "Exponential",
            Variant::Affine { .. } => "Affine",
            Variant::ComplexReIm { .. } => "ComplexReIm",
            Variant::IdempotentBuilt { .. } => "IdempotentBuilt",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Map<String, Value>", into = "SolutionRepr")]
pub struct GsSolution {
    variant: Variant,
    algebra: AlgebraDescriptor,
    /// Matrix of `S'(0)` in coordinates; `None` when `S` is not
    /// differentiable at 0.
    derivative: Option<DMatrix<f64>>,
}

#[derive(Clone, Serialize)]
#[serde(tag = "variant")]
enum VariantRepr {
    Canonical {
        rho: Vec<f64>,
    },
    Partition {
        parts: Vec<Vec<usize>>,
        rho: Vec<f64>,
    },
    DegenerateExp {
        rho: f64,
        gamma_exp: f64,
        /// 1-based.
        axis: usize,
        form: DegenerateForm,
    },
    Exponential {
        exponents: SigmaMatrix,
    },
    Affine {
        sigma: SigmaMatrix,
    },
    ComplexReIm {
        a: f64,
        b: f64,
    },
    IdempotentBuilt {
        idempotents: Vec<Vec<f64>>,
        sigma: Vec<f64>,
    },
}

#[derive(Clone, Serialize)]
struct SolutionRepr {
    #[serde(flatten)]
    variant: VariantRepr,
    algebra: Option<AlgebraDescriptor>,
}

fn take<T: DeserializeOwned>(m: &mut Map<String, Value>, name: &str) -> Result<Option<T>> {
    m.remove(name)
        .map(|v| serde_json::from_value(v).map_err(|e| Error::input(name, e.to_string())))
        .transpose()
}

fn require<T: DeserializeOwned>(m: &mut Map<String, Value>, name: &str) -> Result<T> {
    take(m, name)?.ok_or_else(|| Error::input(name, "missing field"))
}

// Field by field, so that errors name the offending field.
impl TryFrom<Map<String, Value>> for GsSolution {
    type Error = Error;

    fn try_from(mut m: Map<String, Value>) -> Result<Self> {
        let tag: String = require(&mut m, "variant")?;
        let variant = match tag.as_str() {
            "Canonical" => VariantRepr::Canonical {
                rho: require(&mut m, "rho")?,
            },
            "Partition" => VariantRepr::Partition {
                parts: require(&mut m, "parts")?,
                rho: require(&mut m, "rho")?,
            },
            "DegenerateExp" => VariantRepr::DegenerateExp {
                rho: take(&mut m, "rho")?.unwrap_or(0.0),
                gamma_exp: require(&mut m, "gamma_exp")?,
                axis: require(&mut m, "axis")?,
                form: require(&mut m, "form")?,
            },
            "Exponential" => VariantRepr::Exponential {
                exponents: require(&mut m, "exponents")?,
            },
            "Affine" => VariantRepr::Affine {
                sigma: require(&mut m, "sigma")?,
            },
            "ComplexReIm" => VariantRepr::ComplexReIm {
                a: require(&mut m, "a")?,
                b: require(&mut m, "b")?,
            },
            "IdempotentBuilt" => VariantRepr::IdempotentBuilt {
                idempotents: require(&mut m, "idempotents")?,
                sigma: require(&mut m, "sigma")?,
            },
            other => return Err(Error::input("variant", format!("unknown variant `{other}`"))),
        };
        let algebra = take(&mut m, "algebra")?;
        if let Some(extra) = m.keys().next() {
            return Err(Error::input(extra, "unknown field"));
        }
        SolutionRepr { variant, algebra }.try_into()
    }
}

impl TryFrom<SolutionRepr> for GsSolution {
    type Error = Error;

    fn try_from(r: SolutionRepr) -> Result<Self> {
        let hadamard = |d: usize| AlgebraDescriptor::hadamard(d);
        match r.variant {
            VariantRepr::Canonical { rho } => {
                let alg = match r.algebra {
                    Some(a) => a,
                    None => hadamard(rho.len())?,
                };
                if rho.len() != alg.dim() {
                    return Err(Error::input("rho", format!("expected {} entries for {alg}", alg.dim())));
                }
                Ok(GsSolution::canonical(Element::new(alg, rho)?))
            }
            VariantRepr::Partition { parts, rho } => {
                let alg = match r.algebra {
                    Some(a) => a,
                    None => hadamard(rho.len())?,
                };
                GsSolution::partition(alg, PartitionSpec::from_one_based(parts, rho)?)
            }
            VariantRepr::DegenerateExp {
                rho,
                gamma_exp,
                axis,
                form,
            } => {
                expect_algebra(&r.algebra, &hadamard(2)?)?;
                if axis == 0 || axis > 2 {
                    return Err(Error::input("axis", "must be 1 or 2"));
                }
                GsSolution::degenerate_exp(form, rho, gamma_exp, axis - 1)
            }
            VariantRepr::Exponential { exponents } => {
                expect_algebra(&r.algebra, &hadamard(exponents.dim())?)?;
                GsSolution::exponential(exponents)
            }
            VariantRepr::Affine { sigma } => {
                expect_algebra(&r.algebra, &hadamard(sigma.dim())?)?;
                Ok(GsSolution::affine_candidate(sigma))
            }
            VariantRepr::ComplexReIm { a, b } => {
                expect_algebra(&r.algebra, &AlgebraDescriptor::complex())?;
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::input("a/b", "must be finite"));
                }
                Ok(GsSolution::complex_re_im(a, b))
            }
            VariantRepr::IdempotentBuilt { idempotents, sigma } => {
                let alg = match r.algebra {
                    Some(a) => a,
                    None => hadamard(sigma.len())?,
                };
                let es = idempotents
                    .into_iter()
                    .map(|c| Element::new(alg.clone(), c))
                    .collect::<Result<Vec<_>>>()?;
                GsSolution::idempotent_built(alg, es, sigma)
            }
        }
    }
}

fn expect_algebra(given: &Option<AlgebraDescriptor>, required: &AlgebraDescriptor) -> Result<()> {
    match given {
        Some(a) if a != required => Err(Error::input(
            "algebra",
            format!("this variant lives on {}, got {}", required, a),
        )),
        _ => Ok(()),
    }
}

impl From<GsSolution> for SolutionRepr {
    fn from(s: GsSolution) -> Self {
        let variant = match s.variant {
            Variant::Canonical { rho } => VariantRepr::Canonical {
                rho: rho.coords().to_vec(),
            },
            Variant::Partition(p) => VariantRepr::Partition {
                parts: p.parts_one_based(),
                rho: p.rho().to_vec(),
            },
            Variant::DegenerateExp {
                rho,
                gamma_exp,
                axis,
                form,
            } => VariantRepr::DegenerateExp {
                rho,
                gamma_exp,
                axis: axis + 1,
                form,
            },
            Variant::Exponential { exponents } => VariantRepr::Exponential { exponents },
            Variant::Affine { sigma } => VariantRepr::Affine { sigma },
            Variant::ComplexReIm { a, b } => VariantRepr::ComplexReIm { a, b },
            Variant::IdempotentBuilt { idempotents, sigma } => VariantRepr::IdempotentBuilt {
                idempotents: idempotents.iter().map(|e| e.coords().to_vec()).collect(),
                sigma,
            },
        };
        SolutionRepr {
            variant,
            algebra: Some(s.algebra),
        }
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::input(field, "must be finite"))
    }
}

impl GsSolution {
    fn build(variant: Variant, algebra: AlgebraDescriptor) -> Self {
        let mut sol = Self {
            variant,
            algebra,
            derivative: None,
        };
        sol.derivative = sol.compute_derivative();
        sol
    }

    pub fn canonical(rho: Element) -> Self {
        let alg = rho.algebra().clone();
        Self::build(Variant::Canonical { rho }, alg)
    }

    pub fn partition(algebra: AlgebraDescriptor, spec: PartitionSpec) -> Result<Self> {
        if !algebra.is_componentwise() {
            return Err(Error::UnsupportedAlgebra(algebra.to_string()));
        }
        if spec.dim() != algebra.dim() {
            return Err(Error::DimensionMismatch {
                left: algebra.to_string(),
                right: format!("partition of {} indices", spec.dim()),
            });
        }
        Ok(Self::build(Variant::Partition(spec), algebra))
    }

    /// A univariate solution on `R^2` driven by the zero-based `axis`.
    pub fn degenerate_exp(form: DegenerateForm, rho: f64, gamma_exp: f64, axis: usize) -> Result<Self> {
        finite("rho", rho)?;
        finite("gamma_exp", gamma_exp)?;
        if axis > 1 {
            return Err(Error::input("axis", "must address one of the two coordinates"));
        }
        Ok(Self::build(
            Variant::DegenerateExp {
                rho,
                gamma_exp,
                axis,
                form,
            },
            AlgebraDescriptor::hadamard(2)?,
        ))
    }

    pub fn exponential(exponents: SigmaMatrix) -> Result<Self> {
        let d = exponents.dim();
        for k in 0..d {
            for j in 0..d {
                if exponents.get(k, j) != 0.0 && (0..d).any(|l| exponents.get(j, l) != 0.0) {
                    return Err(Error::ConstraintViolated { row: k + 1, col: j + 1 });
                }
            }
        }
        Ok(Self::build(
            Variant::Exponential { exponents },
            AlgebraDescriptor::hadamard(d)?,
        ))
    }

    /// `1 + Σx` without the structural check.
    pub fn affine_candidate(sigma: SigmaMatrix) -> Self {
        let alg = AlgebraDescriptor::hadamard(sigma.dim()).expect("non-empty matrix");
        Self::build(Variant::Affine { sigma }, alg)
    }

    pub fn complex_re_im(a: f64, b: f64) -> Self {
        Self::build(Variant::ComplexReIm { a, b }, AlgebraDescriptor::complex())
    }

    pub fn idempotent_built(algebra: AlgebraDescriptor, idempotents: Vec<Element>, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != algebra.dim() {
            return Err(Error::input(
                "sigma",
                format!("expected {} coefficients", algebra.dim()),
            ));
        }
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("sigma", "coefficients must be finite"));
        }
        for e in &idempotents {
            if e.algebra() != &algebra {
                return Err(Error::DimensionMismatch {
                    left: algebra.to_string(),
                    right: e.algebra().to_string(),
                });
            }
        }
        for (i, e) in idempotents.iter().enumerate() {
            if (&(e * e) - e).norm() > IDEMPOTENT_TOL {
                return Err(Error::NotOrthogonalIdempotents);
            }
            for f in &idempotents[i + 1..] {
                if (e * f).norm() > IDEMPOTENT_TOL {
                    return Err(Error::NotOrthogonalIdempotents);
                }
            }
        }
        Ok(Self::build(Variant::IdempotentBuilt { idempotents, sigma }, algebra))
    }

    /// The partition solution `1 + Σx` on `R^d` for a valid `Σ`.
    pub fn from_sigma(m: &SigmaMatrix, tol: f64) -> Result<Self> {
        let spec = structure::recover_partition(m, tol)?;
        Self::partition(AlgebraDescriptor::hadamard(m.dim())?, spec)
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn check_algebra(&self, x: &Element) -> Result<()> {
        if x.algebra() != &self.algebra {
            return Err(Error::DimensionMismatch {
                left: self.algebra.to_string(),
                right: x.algebra().to_string(),
            });
        }
        Ok(())
    }

    /// `S(x)`. Outside the natural domain of a power form the value is NaN.
    ///
    /// # Panics
    /// If `x` belongs to a different algebra.
    pub fn eval(&self, x: &Element) -> Element {
        self.check_algebra(x).expect("element from another algebra");
        let alg = &self.algebra;
        let c = x.coords();
        match &self.variant {
            Variant::Canonical { rho } => &Element::one(alg) + &(rho * x),
            Variant::Partition(p) => {
                let vals = p.part_values(c);
                let mut out = vec![0.0; c.len()];
                for (part, v) in p.parts().iter().zip(vals) {
                    for &i in part {
                        out[i] = 1.0 + v;
                    }
                }
                Element::from_raw(alg, out)
            }
            Variant::DegenerateExp {
                rho,
                gamma_exp,
                axis,
                form,
            } => {
                let xa = c[*axis];
                let (sa, so) = match form {
                    DegenerateForm::OneExp => (1.0, (gamma_exp * xa).exp()),
                    DegenerateForm::AffinePower => {
                        let base = 1.0 + rho * xa;
                        (base, real_pow(base, *gamma_exp))
                    }
                    DegenerateForm::PurePower => (xa, real_pow(xa, *gamma_exp)),
                };
                let mut out = vec![so; 2];
                out[*axis] = sa;
                Element::from_raw(alg, out)
            }
            Variant::Exponential { exponents } => {
                let g = exponents.apply(c);
                Element::from_raw(alg, g.into_iter().map(f64::exp).collect())
            }
            Variant::Affine { sigma } => Element::from_raw(alg, sigma.apply(c).into_iter().map(|v| 1.0 + v).collect()),
            Variant::ComplexReIm { a, b } => Element::from_raw(alg, vec![1.0 + a * c[0] + b * c[1], 0.0]),
            Variant::IdempotentBuilt { idempotents, sigma } => {
                let mut acc = Element::one(alg);
                for e in idempotents {
                    let ex = e * x;
                    let s: f64 = ex.coords().iter().zip(sigma).map(|(a, b)| a * b).sum();
                    acc = &acc + &e.scale(s);
                }
                acc
            }
        }
    }

    pub fn try_eval(&self, x: &Element) -> Result<Element> {
        self.check_algebra(x)?;
        Ok(self.eval(x))
    }

    /// True when `S(x)` is finite with every spectral modulus above
    /// [`GROUP_EPS`].
    pub fn in_group(&self, x: &Element) -> bool {
        self.eval(x).is_invertible_within(GROUP_EPS)
    }

    pub fn in_kernel(&self, x: &Element) -> bool {
        let s = self.eval(x);
        s.is_finite() && (&s - &Element::one(&self.algebra)).norm() < KERNEL_TOL
    }

    pub(crate) fn circle_op_unchecked(&self, x: &Element, y: &Element) -> Element {
        x + &(&self.eval(x) * y)
    }

    /// `x ∘ y = x + S(x)y`.
    pub fn circle_op(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check_algebra(x)?;
        self.check_algebra(y)?;
        Ok(self.circle_op_unchecked(x, y))
    }

    /// `-x S(x)^{-1}`.
    pub fn circle_inv(&self, x: &Element) -> Result<Element> {
        self.check_algebra(x)?;
        let s = self.eval(x);
        if !s.is_invertible_within(GROUP_EPS) {
            return Err(Error::NotInGroup);
        }
        Ok(-&(x * &s.invert()?))
    }

    /// `ρ = S(1_A) - 1_A`.
    pub fn rho_of(&self) -> Result<Element> {
        let one = Element::one(&self.algebra);
        let s1 = self.eval(&one);
        if !s1.is_invertible() {
            return Err(Error::UnitNotInGroup);
        }
        Ok(&s1 - &one)
    }

    /// `N(x) = S(x) - 1_A - ρx`.
    pub fn adjustor_n(&self, x: &Element) -> Result<Element> {
        self.check_algebra(x)?;
        let rho = self.rho_of()?;
        Ok(self.adjustor_with(&rho, x))
    }

    pub(crate) fn adjustor_with(&self, rho: &Element, x: &Element) -> Element {
        let one = Element::one(&self.algebra);
        &(&self.eval(x) - &one) - &(rho * x)
    }

    fn compute_derivative(&self) -> Option<DMatrix<f64>> {
        let d = self.algebra.dim();
        match &self.variant {
            Variant::DegenerateExp {
                rho,
                gamma_exp,
                axis,
                form,
            } => {
                let (a, o) = (*axis, 1 - *axis);
                let mut j = DMatrix::zeros(2, 2);
                match form {
                    DegenerateForm::OneExp => j[(o, a)] = *gamma_exp,
                    DegenerateForm::AffinePower => {
                        j[(a, a)] = *rho;
                        j[(o, a)] = gamma_exp * rho;
                    }
                    DegenerateForm::PurePower => return None,
                }
                Some(j)
            }
            Variant::Exponential { exponents } => Some(exponents.matrix().clone()),
            // the remaining variants are 1 + (linear map), read off columns
            _ => {
                let one = Element::one(&self.algebra);
                let mut j = DMatrix::zeros(d, d);
                for k in 0..d {
                    let mut e = vec![0.0; d];
                    e[k] = 1.0;
                    let col = &self.eval(&Element::from_raw(&self.algebra, e)) - &one;
                    for (r, v) in col.coords().iter().enumerate() {
                        j[(r, k)] = *v;
                    }
                }
                Some(j)
            }
        }
    }

    /// Coordinate matrix `J` of `γ = S'(0)`, so that `γ(u) = J u`.
    pub fn derivative_matrix(&self) -> Result<&DMatrix<f64>> {
        self.derivative.as_ref().ok_or(Error::NotDifferentiable)
    }

    /// `γ(u) = S'(0)u` from the closed-form derivative.
    pub fn gamma(&self, u: &Element) -> Result<Element> {
        self.check_algebra(u)?;
        let j = self.derivative_matrix()?;
        let v = j * DVector::from_column_slice(u.coords());
        Ok(Element::from_raw(&self.algebra, v.iter().copied().collect()))
    }

    /// Central difference `(S(hu) - S(-hu))/(2h)`, a cross-check for [`gamma`](Self::gamma).
    pub fn gamma_fd(&self, u: &Element, h: f64) -> Result<Element> {
        self.check_algebra(u)?;
        let plus = self.eval(&u.scale(h));
        let minus = self.eval(&u.scale(-h));
        Ok((&plus - &minus).scale(0.5 / h))
    }

    /// Operator norm of `γ` for the algebra norm: max absolute row sum under
    /// the max-norm, spectral norm of the 2x2 matrix under the modulus.
    pub fn gamma_operator_norm(&self) -> Result<f64> {
        let j = self.derivative_matrix()?;
        if self.algebra.is_componentwise() {
            Ok(j.row_iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max))
        } else {
            Ok(j.clone().svd(false, false).singular_values.max())
        }
    }

    /// Whether `γ(uγ(u)^k) = γ(u)^{k+1}` holds identically for this variant,
    /// which is what the closed-form tilt inverse needs.
    pub fn is_omega_homogeneous(&self) -> bool {
        matches!(
            self.variant,
            Variant::Canonical { .. }
                | Variant::Partition(_)
                | Variant::ComplexReIm { .. }
                | Variant::IdempotentBuilt { .. }
        )
    }

    /// Whether `S(x) - 1` is linear in `x`.
    pub fn is_affine(&self) -> bool {
        self.is_omega_homogeneous()
    }

    /// Orthonormal coordinate basis of `null(S'(0))`; for every variant here
    /// this spans the kernel `𝒩 = {x : S(x) = 1}`.
    pub fn kernel_basis(&self) -> Result<Vec<Element>> {
        let j = self.derivative_matrix()?;
        Ok(structure::null_space(j)
            .into_iter()
            .map(|v| Element::from_raw(&self.algebra, v))
            .collect())
    }

    pub fn is_complex(&self) -> bool {
        self.algebra.kind() == AlgebraKind::ComplexAsR2
    }
}

fn real_pow(base: f64, p: f64) -> f64 {
    if base > 0.0 {
        base.powf(p)
    } else if base == 0.0 && p > 0.0 {
        0.0
    } else {
        f64::NAN
    }
}
