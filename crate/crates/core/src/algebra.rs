//! Concrete commutative unital real Banach algebras.
//!
//! Three kinds are supported: `R^d` with the Hadamard (componentwise)
//! product, `C` viewed as the real algebra `R^2`, and a grid discretization
//! of `C[0,1]`, which multiplies componentwise like `R^d` and only carries
//! its sample abscissae along for reporting.
//!
//! The norm is the max-norm on coordinates (the modulus for `C`), which is
//! submultiplicative with `||1_A|| = 1`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar;

/// Invertibility threshold on spectral moduli.
pub const INV_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgebraKind {
    HadamardRd,
    ComplexAsR2,
    GridCInterval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DescriptorRepr")]
pub struct AlgebraDescriptor {
    kind: AlgebraKind,
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct DescriptorRepr {
    kind: AlgebraKind,
    dim: usize,
    #[serde(default)]
    grid: Option<Vec<f64>>,
}

impl TryFrom<DescriptorRepr> for AlgebraDescriptor {
    type Error = Error;

    fn try_from(r: DescriptorRepr) -> Result<Self> {
        match r.kind {
            AlgebraKind::HadamardRd => {
                if r.grid.is_some() {
                    return Err(Error::input("algebra.grid", "only GridCInterval carries a grid"));
                }
                AlgebraDescriptor::hadamard(r.dim)
            }
            AlgebraKind::ComplexAsR2 => {
                if r.dim != 2 {
                    return Err(Error::input("algebra.dim", "ComplexAsR2 has dim 2"));
                }
                Ok(AlgebraDescriptor::complex())
            }
            AlgebraKind::GridCInterval => {
                let grid = r
                    .grid
                    .ok_or_else(|| Error::input("algebra.grid", "GridCInterval requires a grid"))?;
                if grid.len() != r.dim {
                    return Err(Error::input("algebra.grid", "grid length must equal dim"));
                }
                AlgebraDescriptor::grid(grid)
            }
        }
    }
}

impl AlgebraDescriptor {
    pub fn hadamard(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDescriptor("dim must be at least 1".into()));
        }
        Ok(Self {
            kind: AlgebraKind::HadamardRd,
            dim,
            grid: None,
        })
    }

    pub fn complex() -> Self {
        Self {
            kind: AlgebraKind::ComplexAsR2,
            dim: 2,
            grid: None,
        }
    }

    /// Grid discretization of `C[0,1]`; abscissae must be strictly
    /// increasing inside `[0, 1]`.
    pub fn grid(abscissae: Vec<f64>) -> Result<Self> {
        if abscissae.is_empty() {
            return Err(Error::InvalidDescriptor("grid must be non-empty".into()));
        }
        if abscissae.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidDescriptor("grid points must lie in [0,1]".into()));
        }
        if abscissae.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDescriptor("grid must be strictly increasing".into()));
        }
        Ok(Self {
            kind: AlgebraKind::GridCInterval,
            dim: abscissae.len(),
            grid: Some(abscissae),
        })
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid_points(&self) -> Option<&[f64]> {
        self.grid.as_deref()
    }

    /// Componentwise (Hadamard or grid) multiplication.
    pub fn is_componentwise(&self) -> bool {
        self.kind != AlgebraKind::ComplexAsR2
    }
}

impl fmt::Display for AlgebraDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AlgebraKind::HadamardRd => write!(f, "HadamardRd({})", self.dim),
            AlgebraKind::ComplexAsR2 => write!(f, "ComplexAsR2"),
            AlgebraKind::GridCInterval => write!(f, "GridCInterval({})", self.dim),
        }
    }
}

/// Spectrum of an element, as complex points `(re, im)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub points: Vec<(f64, f64)>,
}

impl Spectrum {
    pub fn as_complex(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.points.iter().map(|&(re, im)| Complex64::new(re, im))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElementRepr")]
pub struct Element {
    algebra: AlgebraDescriptor,
    coords: Vec<f64>,
}

#[derive(Deserialize)]
struct ElementRepr {
    algebra: AlgebraDescriptor,
    coords: Vec<f64>,
}

impl TryFrom<ElementRepr> for Element {
    type Error = Error;

    fn try_from(r: ElementRepr) -> Result<Self> {
        Element::new(r.algebra, r.coords)
    }
}

impl Element {
    pub fn new(algebra: AlgebraDescriptor, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != algebra.dim {
            return Err(Error::input(
                "coords",
                format!("expected {} coordinates, got {}", algebra.dim, coords.len()),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("coords", "coordinates must be finite"));
        }
        Ok(Self { algebra, coords })
    }

    /// Builds an element without the finiteness check; used for values of
    /// maps evaluated outside their domain (which come back as NaN).
    pub(crate) fn from_raw(algebra: &AlgebraDescriptor, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), algebra.dim);
        Self {
            algebra: algebra.clone(),
            coords,
        }
    }

    pub fn zero(algebra: &AlgebraDescriptor) -> Self {
        Self::from_raw(algebra, vec![0.0; algebra.dim])
    }

    pub fn one(algebra: &AlgebraDescriptor) -> Self {
        Self::scalar(algebra, 1.0)
    }

    /// `t * 1_A`.
    pub fn scalar(algebra: &AlgebraDescriptor, t: f64) -> Self {
        let coords = if algebra.is_componentwise() {
            vec![t; algebra.dim]
        } else {
            vec![t, 0.0]
        };
        Self::from_raw(algebra, coords)
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    fn check_same(&self, other: &Element) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::DimensionMismatch {
                left: self.algebra.to_string(),
                right: other.algebra.to_string(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Element, f: impl Fn(f64, f64) -> f64) -> Element {
        let coords = self.coords.iter().zip(&other.coords).map(|(&a, &b)| f(a, b)).collect();
        Self::from_raw(&self.algebra, coords)
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.check_same(other)?;
        if self.algebra.is_componentwise() {
            return Ok(self.zip_with(other, |a, b| a * b));
        }
        let z = self.as_complex() * other.as_complex();
        Ok(Self::from_raw(&self.algebra, vec![z.re, z.im]))
    }

    pub fn scale(&self, t: f64) -> Element {
        let coords = self.coords.iter().map(|c| c * t).collect();
        Self::from_raw(&self.algebra, coords)
    }

    /// Integer power by repeated multiplication; `a^0 = 1_A`.
    pub fn powi(&self, k: u32) -> Element {
        let mut acc = Element::one(&self.algebra);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    fn as_complex(&self) -> Complex64 {
        Complex64::new(self.coords[0], self.coords[1])
    }

    /// Max-norm of the coordinates, modulus for `C`.
    pub fn norm(&self) -> f64 {
        if self.algebra.is_componentwise() {
            self.coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
        } else {
            self.as_complex().norm()
        }
    }

    /// `norm(self - other)`; panics on mismatched algebras.
    pub fn dist(&self, other: &Element) -> f64 {
        (self - other).norm()
    }

    /// Spectral points without multiplicity bookkeeping beyond the
    /// conjugate pair for `C`.
    pub fn spectral_points(&self) -> Vec<Complex64> {
        if self.algebra.is_componentwise() {
            self.coords.iter().map(|&c| Complex64::new(c, 0.0)).collect()
        } else {
            let z = self.as_complex();
            vec![z, z.conj()]
        }
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum {
            points: self.spectral_points().iter().map(|z| (z.re, z.im)).collect(),
        }
    }

    pub fn min_spectral_modulus(&self) -> f64 {
        self.spectral_points()
            .iter()
            .fold(f64::INFINITY, |m, z| m.min(z.norm()))
    }

    pub fn is_invertible_within(&self, eps: f64) -> bool {
        self.is_finite() && self.min_spectral_modulus() > eps
    }

    pub fn is_invertible(&self) -> bool {
        self.is_invertible_within(INV_EPS)
    }

    pub fn invert(&self) -> Result<Element> {
        if !self.is_invertible() {
            return Err(Error::NotInvertible { eps: INV_EPS });
        }
        Ok(self.map_spectral(|z| z.inv()))
    }

    /// `self * other^{-1}`.
    pub fn div(&self, other: &Element) -> Result<Element> {
        self.check_same(other)?;
        Ok(self * &other.invert()?)
    }

    /// Applies a scalar function through the functional calculus: per
    /// coordinate for componentwise algebras, as `f(z)` for `C`.
    ///
    /// `f` must satisfy `f(conj z) = conj f(z)`; on real coordinates only
    /// the real part of the value is kept.
    pub fn map_spectral(&self, f: impl Fn(Complex64) -> Complex64) -> Element {
        if self.algebra.is_componentwise() {
            let coords = self.coords.iter().map(|&c| f(Complex64::new(c, 0.0)).re).collect();
            Self::from_raw(&self.algebra, coords)
        } else {
            let w = f(self.as_complex());
            Self::from_raw(&self.algebra, vec![w.re, w.im])
        }
    }

    pub fn exp(&self) -> Element {
        self.map_spectral(|z| z.exp())
    }

    /// Principal logarithm; the spectrum must avoid `(-inf, 0]`.
    pub fn log_principal(&self) -> Result<Element> {
        if self.spectral_points().into_iter().any(scalar::on_negative_axis) {
            return Err(Error::LogBranchViolation);
        }
        Ok(self.map_spectral(|z| {
            if z.im == 0.0 {
                Complex64::new(z.re.ln(), 0.0)
            } else {
                z.ln()
            }
        }))
    }

    /// `(e^a - 1)/a` with value 1 at zero spectral points.
    pub fn mu(&self) -> Element {
        self.map_spectral(scalar::mu)
    }
}

impl<'a> Add<&'a Element> for &'a Element {
    type Output = Element;

    fn add(self, rhs: &'a Element) -> Element {
        Element::add(self, rhs).expect("algebra mismatch in +")
    }
}

impl<'a> Sub<&'a Element> for &'a Element {
    type Output = Element;

    fn sub(self, rhs: &'a Element) -> Element {
        Element::sub(self, rhs).expect("algebra mismatch in -")
    }
}

impl<'a> Mul<&'a Element> for &'a Element {
    type Output = Element;

    fn mul(self, rhs: &'a Element) -> Element {
        Element::mul(self, rhs).expect("algebra mismatch in *")
    }
}

impl Neg for &Element {
    type Output = Element;

    fn neg(self) -> Element {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn had(c: &[f64]) -> Element {
        Element::new(AlgebraDescriptor::hadamard(c.len()).unwrap(), c.to_vec()).unwrap()
    }

    fn cx(re: f64, im: f64) -> Element {
        Element::new(AlgebraDescriptor::complex(), vec![re, im]).unwrap()
    }

    #[test]
    fn hadamard_product() {
        assert_eq!((&had(&[1.0, 2.0]) * &had(&[3.0, 4.0])).coords(), &[3.0, 8.0]);
    }

    #[test]
    fn unit_law() {
        let a = had(&[1.5, -2.0, 0.25]);
        assert_eq!(&a * &Element::one(a.algebra()), a);
        let z = cx(0.3, -0.7);
        assert_eq!(&z * &Element::one(z.algebra()), z);
    }

    #[test]
    fn i_squared() {
        assert_eq!((&cx(0.0, 1.0) * &cx(0.0, 1.0)).coords(), &[-1.0, 0.0]);
    }

    #[test]
    fn mismatch_is_an_error() {
        let err = had(&[1.0, 2.0]).mul(&cx(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        assert!(had(&[1.0]).add(&had(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn inversion() {
        assert_eq!(had(&[2.0, 4.0]).invert().unwrap().coords(), &[0.5, 0.25]);
        assert!(matches!(had(&[0.0, 1.0]).invert(), Err(Error::NotInvertible { .. })));
        let inv = cx(0.0, 2.0).invert().unwrap();
        assert!((inv.coords()[0]).abs() < 1e-16 && (inv.coords()[1] + 0.5).abs() < 1e-16);
    }

    #[test]
    fn exp_log() {
        let alg = AlgebraDescriptor::hadamard(2).unwrap();
        assert_eq!(Element::zero(&alg).exp(), Element::one(&alg));
        assert_eq!(Element::one(&alg).log_principal().unwrap(), Element::zero(&alg));
        let a = had(&[2.0, 3.0]);
        assert!(a.log_principal().unwrap().exp().dist(&a) < 1e-12);
        assert_eq!(had(&[1.0, -1.0]).log_principal(), Err(Error::LogBranchViolation));
        assert_eq!(cx(-2.0, 0.0).log_principal(), Err(Error::LogBranchViolation));
        let z = cx(-2.0, 0.5);
        assert!(z.log_principal().unwrap().exp().dist(&z) < 1e-12);
    }

    #[test]
    fn spectrum_and_norm() {
        let a = had(&[2.0, -3.0, 0.0]);
        assert_eq!(a.spectrum().points, vec![(2.0, 0.0), (-3.0, 0.0), (0.0, 0.0)]);
        assert_eq!(a.norm(), 3.0);
        let z = cx(3.0, 4.0);
        assert_eq!(z.spectrum().points, vec![(3.0, 4.0), (3.0, -4.0)]);
        assert_eq!(z.norm(), 5.0);
        assert_eq!(Element::one(&AlgebraDescriptor::hadamard(5).unwrap()).norm(), 1.0);
        assert_eq!(Element::one(&AlgebraDescriptor::complex()).norm(), 1.0);
    }

    #[test]
    fn mu_values() {
        let alg = AlgebraDescriptor::hadamard(1).unwrap();
        assert_eq!(Element::zero(&alg).mu(), Element::one(&alg));
        let e = std::f64::consts::E;
        assert!((had(&[1.0]).mu().coords()[0] - (e - 1.0)).abs() < 1e-15);
        let m = had(&[1.0, 0.0]).mu();
        assert!((m.coords()[0] - (e - 1.0)).abs() < 1e-15);
        assert_eq!(m.coords()[1], 1.0);
    }

    #[test]
    fn descriptor_validation() {
        assert!(AlgebraDescriptor::hadamard(0).is_err());
        assert!(AlgebraDescriptor::grid(vec![0.0, 0.5, 0.5]).is_err());
        assert!(AlgebraDescriptor::grid(vec![0.0, 1.5]).is_err());
        assert!(AlgebraDescriptor::grid(vec![0.0, 0.5, 1.0]).is_ok());
        assert!(Element::new(AlgebraDescriptor::complex(), vec![1.0]).is_err());
    }

    #[test]
    fn json_shape() {
        let a = had(&[1.0, 2.0]);
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v["algebra"]["kind"], "HadamardRd");
        assert_eq!(v["algebra"]["dim"], 2);
        assert!(v["algebra"].get("grid").is_none());
        let bad = r#"{"algebra":{"kind":"ComplexAsR2","dim":3},"coords":[1,2,3]}"#;
        assert!(serde_json::from_str::<Element>(bad).is_err());
        let g = r#"{"algebra":{"kind":"GridCInterval","dim":2,"grid":[0,1]},"coords":[1,2]}"#;
        let e: Element = serde_json::from_str(g).unwrap();
        assert_eq!(e.algebra().grid_points(), Some(&[0.0, 1.0][..]));
    }
}
