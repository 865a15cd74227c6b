//! Structure of Euclidean solutions `S(x) = 1 + Σx` on `R^d`.
//!
//! A matrix `Σ` solves the equation iff `σ_ij != 0` forces rows `i` and `j`
//! to coincide. The coordinates then split into parts; inside a part every
//! component of `S` equals `1 + Σ_{k∈I} ρ_k x_k`, and the Popa group splits
//! as a direct product of one multi-Popa factor per part.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, Element};
use crate::error::{Error, Result};
use crate::sampling;
use crate::solution::{GsSolution, Variant};

/// Default tolerance for row comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative singular-value cutoff for numerical rank.
pub const RANK_RTOL: f64 = 1e-10;

/// Square real matrix `Σ = (σ_ij)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SigmaMatrix {
    m: DMatrix<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for SigmaMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SigmaMatrix::from_rows(&rows)
    }
}

impl From<SigmaMatrix> for Vec<Vec<f64>> {
    fn from(s: SigmaMatrix) -> Self {
        (0..s.dim()).map(|i| s.row(i)).collect()
    }
}

impl SigmaMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::input("sigma", "matrix must be non-empty"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::input(
                    "sigma",
                    format!("row {} has {} entries, expected {}", i + 1, r.len(), d),
                ));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::input("sigma", format!("row {} has a non-finite entry", i + 1)));
            }
        }
        Ok(Self {
            m: DMatrix::from_fn(d, d, |i, j| rows[i][j]),
        })
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::input("sigma", "matrix must be square and non-empty"));
        }
        Ok(Self { m })
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            m: DMatrix::zeros(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.m.row(i).iter().copied().collect()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.m[(i, j)] * x[j]).sum())
            .collect()
    }

    fn row_norm(&self, i: usize) -> f64 {
        self.m.row(i).iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }
}

/// Partition of `{0..d}` (1-based on the wire) with generator coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct PartitionSpec {
    parts: Vec<Vec<usize>>,
    rho: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct PartitionRepr {
    parts: Vec<Vec<usize>>,
    rho: Vec<f64>,
}

impl TryFrom<PartitionRepr> for PartitionSpec {
    type Error = Error;

    fn try_from(r: PartitionRepr) -> Result<Self> {
        PartitionSpec::from_one_based(r.parts, r.rho)
    }
}

impl From<PartitionSpec> for PartitionRepr {
    fn from(p: PartitionSpec) -> Self {
        PartitionRepr {
            parts: p.parts_one_based(),
            rho: p.rho,
        }
    }
}

impl PartitionSpec {
    /// Zero-based parts; they must be disjoint and cover `0..rho.len()`.
    pub fn new(mut parts: Vec<Vec<usize>>, rho: Vec<f64>) -> Result<Self> {
        let d = rho.len();
        if d == 0 {
            return Err(Error::input("rho", "must be non-empty"));
        }
        if rho.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("rho", "entries must be finite"));
        }
        let mut seen = vec![false; d];
        for part in &mut parts {
            if part.is_empty() {
                return Err(Error::input("parts", "parts must be non-empty"));
            }
            part.sort_unstable();
            for &i in part.iter() {
                if i >= d {
                    return Err(Error::input("parts", format!("index {} out of range 1..={}", i + 1, d)));
                }
                if seen[i] {
                    return Err(Error::input("parts", format!("index {} appears twice", i + 1)));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::input("parts", format!("index {} is not covered", missing + 1)));
        }
        parts.sort_unstable_by_key(|p| p[0]);
        Ok(Self { parts, rho })
    }

    pub fn from_one_based(parts: Vec<Vec<usize>>, rho: Vec<f64>) -> Result<Self> {
        let mut zero_based = Vec::with_capacity(parts.len());
        for p in parts {
            let mut q = Vec::with_capacity(p.len());
            for i in p {
                if i == 0 {
                    return Err(Error::input("parts", "indices are 1-based"));
                }
                q.push(i - 1);
            }
            zero_based.push(q);
        }
        Self::new(zero_based, rho)
    }

    /// Every index in its own part: `S(x) = 1 + ρx`.
    pub fn singletons(rho: Vec<f64>) -> Result<Self> {
        Self::new((0..rho.len()).map(|i| vec![i]).collect(), rho)
    }

    pub fn dim(&self) -> usize {
        self.rho.len()
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn parts_one_based(&self) -> Vec<Vec<usize>> {
        self.parts.iter().map(|p| p.iter().map(|i| i + 1).collect()).collect()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// `σ_I(x) = Σ_{k∈I} ρ_k x_k` for each part.
    pub fn part_values(&self, x: &[f64]) -> Vec<f64> {
        self.parts
            .iter()
            .map(|p| p.iter().map(|&k| self.rho[k] * x[k]).sum())
            .collect()
    }

    /// `Σ_ij = ρ_j` when `i, j` share a part, else 0.
    pub fn induced_sigma(&self) -> SigmaMatrix {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for p in &self.parts {
            for &i in p {
                for &j in p {
                    m[(i, j)] = self.rho[j];
                }
            }
        }
        SigmaMatrix { m }
    }

    fn part_rho(&self, part: &[usize]) -> Vec<f64> {
        part.iter().map(|&k| self.rho[k]).collect()
    }
}

/// Checks the row constraint, reporting the first offending entry.
pub fn check_sigma(m: &SigmaMatrix, tol: f64) -> Result<()> {
    let d = m.dim();
    for i in 0..d {
        let ni = m.row_norm(i);
        for j in 0..d {
            if m.get(i, j).abs() <= tol * ni.max(1.0) {
                continue;
            }
            let scale = tol * ni.max(m.row_norm(j)).max(1.0);
            if (0..d).any(|k| (m.get(i, k) - m.get(j, k)).abs() > scale) {
                return Err(Error::ConstraintViolated { row: i + 1, col: j + 1 });
            }
        }
    }
    Ok(())
}

/// True iff `σ_ij != 0` implies rows `i` and `j` agree, within `tol`.
pub fn validate_sigma(m: &SigmaMatrix, tol: f64) -> bool {
    check_sigma(m, tol).is_ok()
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut k = i;
    while parent[k] != r {
        let next = parent[k];
        parent[k] = r;
        k = next;
    }
    r
}

/// Recovers the partition and generator of a valid `Σ`.
///
/// Parts are the connected components of the graph with an edge `i–j`
/// whenever `σ_ij` or `σ_ji` is non-negligible; `ρ_j` is read off the
/// first row of `j`'s part.
pub fn recover_partition(m: &SigmaMatrix, tol: f64) -> Result<PartitionSpec> {
    check_sigma(m, tol)?;
    let d = m.dim();
    let mut parent: Vec<usize> = (0..d).collect();
    for i in 0..d {
        let ni = m.row_norm(i).max(1.0);
        for j in 0..d {
            if i != j && m.get(i, j).abs() > tol * ni {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; d];
    for i in 0..d {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = parts.len();
            parts.push(Vec::new());
        }
        parts[root_slot[r]].push(i);
    }
    let mut rho = vec![0.0; d];
    for p in &parts {
        let first = p[0];
        for &j in p {
            rho[j] = m.get(first, j);
        }
    }
    PartitionSpec::new(parts, rho)
}

/// Numerical rank with cutoff `RANK_RTOL * largest singular value`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_RTOL * smax).count()
}

/// Orthonormal basis of the null space of a square matrix, each vector
/// signed so that its largest-magnitude entry is positive.
pub fn null_space(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let d = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let cut = RANK_RTOL * smax;
    // thin SVD of a square matrix returns all d right singular vectors
    debug_assert_eq!(v_t.nrows(), d);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|&(_, &s)| smax == 0.0 || s <= cut)
        .map(|(k, _)| canonical_sign(v_t.row(k).iter().copied().collect()))
        .collect()
}

fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Orthonormal basis of `null(Σ)` as elements of `R^d`.
pub fn kernel_subspace(m: &SigmaMatrix, _tol: f64) -> Vec<Element> {
    let alg = AlgebraDescriptor::hadamard(m.dim()).expect("non-empty");
    null_space(&m.m)
        .into_iter()
        .map(|v| Element::from_raw(&alg, v))
        .collect()
}

/// One multi-Popa factor: the part and its generator restricted to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    /// 1-based indices.
    pub part: Vec<usize>,
    pub generator: Vec<f64>,
}

impl Factor {
    pub fn dim(&self) -> usize {
        self.part.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub valid: bool,
    pub partition: Option<PartitionSpec>,
    pub kernel_basis: Vec<Vec<f64>>,
    pub kernel_dim: usize,
    pub rank: usize,
    pub factors: Vec<Factor>,
    /// Max defect between the projected circle operation and the factor
    /// operations over the internal sample.
    pub max_factor_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<(usize, usize)>,
}

const FACTOR_SAMPLES: usize = 256;
const FACTOR_SEED: u64 = 0x5eed;

/// Validation, partition, kernel and factorization of `Σ` in one report;
/// an invalid matrix yields `valid = false` with no partition or factors.
pub fn analyze(m: &SigmaMatrix, tol: f64) -> StructureReport {
    let kernel: Vec<Vec<f64>> = null_space(&m.m);
    let rank = numerical_rank(&m.m);
    let mut report = StructureReport {
        valid: false,
        partition: None,
        kernel_dim: m.dim() - rank,
        kernel_basis: kernel,
        rank,
        factors: Vec::new(),
        max_factor_defect: None,
        violation: None,
    };
    match recover_partition(m, tol) {
        Ok(p) => {
            let (factors, defect) = factors_of(&p);
            report.valid = true;
            report.partition = Some(p);
            report.factors = factors;
            report.max_factor_defect = Some(defect);
        }
        Err(Error::ConstraintViolated { row, col }) => report.violation = Some((row, col)),
        Err(_) => {}
    }
    report
}

/// Splits the Popa group of `1 + Σx` into multi-Popa factors, verifying on
/// sampled pairs that the projected operation `(x ∘ y)_I` equals
/// `x_I + S_I(x_I) y_I`.
pub fn factorize(m: &SigmaMatrix, tol: f64) -> Result<StructureReport> {
    check_sigma(m, tol)?;
    Ok(analyze(m, tol))
}

fn factors_of(p: &PartitionSpec) -> (Vec<Factor>, f64) {
    let factors: Vec<Factor> = p
        .parts()
        .iter()
        .map(|part| Factor {
            part: part.iter().map(|i| i + 1).collect(),
            generator: p.part_rho(part),
        })
        .collect();

    let alg = AlgebraDescriptor::hadamard(p.dim()).expect("non-empty");
    let sol = GsSolution::partition(alg.clone(), p.clone()).expect("valid partition");
    let mut rng = sampling::seeded_rng(FACTOR_SEED);
    let mut defect = 0.0_f64;
    for _ in 0..FACTOR_SAMPLES {
        let x = sampling::sample_box(&mut rng, &alg, 0.4);
        let y = sampling::sample_box(&mut rng, &alg, 0.4);
        let full = sol.circle_op_unchecked(&x, &y);
        for (f, part) in factors.iter().zip(p.parts()) {
            let s_i = 1.0
                + part
                    .iter()
                    .zip(&f.generator)
                    .map(|(&k, g)| g * x.coords()[k])
                    .sum::<f64>();
            for &k in part {
                let factor_val = x.coords()[k] + s_i * y.coords()[k];
                defect = defect.max((full.coords()[k] - factor_val).abs());
            }
        }
    }
    (factors, defect)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwoDClass {
    CoDependent,
    Independent,
    DegenerateUnivariate,
    Trivial,
}

/// Class of a solution on `R^2` plus its parameters: `[ρ1, ρ2]` for the
/// affine classes, `[axis (1-based), ρ, γ]` for the univariate class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoDClassification {
    pub class: TwoDClass,
    pub params: Vec<f64>,
}

fn classify_affine_2d(p: &PartitionSpec) -> TwoDClassification {
    let rho = p.rho();
    let zero = |v: f64| v == 0.0;
    if rho.iter().all(|&v| zero(v)) {
        return TwoDClassification {
            class: TwoDClass::Trivial,
            params: vec![],
        };
    }
    if p.parts().len() == 1 {
        return TwoDClassification {
            class: TwoDClass::CoDependent,
            params: rho.to_vec(),
        };
    }
    if rho.iter().all(|&v| !zero(v)) {
        return TwoDClassification {
            class: TwoDClass::Independent,
            params: rho.to_vec(),
        };
    }
    // (1 + ρx_a, 1): univariate with τ ≡ 1
    let axis = if zero(rho[0]) { 1 } else { 0 };
    TwoDClassification {
        class: TwoDClass::DegenerateUnivariate,
        params: vec![(axis + 1) as f64, rho[axis], 0.0],
    }
}

/// Assigns one of the four exhaustive classes on `R^2`.
pub fn classify_2d(sol: &GsSolution) -> Result<TwoDClassification> {
    let alg = sol.algebra();
    if !alg.is_componentwise() {
        return Err(Error::UnsupportedAlgebra(alg.to_string()));
    }
    if alg.dim() != 2 {
        return Err(Error::UnsupportedDimension(alg.dim()));
    }
    match sol.variant() {
        Variant::Canonical { rho } => {
            let p = PartitionSpec::singletons(rho.coords().to_vec())?;
            Ok(classify_affine_2d(&p))
        }
        Variant::Partition(p) => Ok(classify_affine_2d(p)),
        Variant::DegenerateExp {
            rho, gamma_exp, axis, ..
        } => Ok(TwoDClassification {
            class: TwoDClass::DegenerateUnivariate,
            params: vec![(*axis + 1) as f64, *rho, *gamma_exp],
        }),
        Variant::Exponential { exponents } => {
            if exponents.matrix().iter().all(|&v| v == 0.0) {
                return Ok(TwoDClassification {
                    class: TwoDClass::Trivial,
                    params: vec![],
                });
            }
            // one driving coordinate a with S_a ≡ 1, the other e^{g x_a}
            let axis = if exponents.get(1, 0) != 0.0 { 0 } else { 1 };
            let g = exponents.get(1 - axis, axis);
            Ok(TwoDClassification {
                class: TwoDClass::DegenerateUnivariate,
                params: vec![(axis + 1) as f64, 0.0, g],
            })
        }
        Variant::Affine { sigma } => Ok(classify_affine_2d(&recover_partition(sigma, DEFAULT_TOL)?)),
        Variant::IdempotentBuilt { .. } => {
            let sigma = SigmaMatrix::from_matrix(sol.derivative_matrix()?.clone())?;
            Ok(classify_affine_2d(&recover_partition(&sigma, DEFAULT_TOL)?))
        }
        Variant::ComplexReIm { .. } => Err(Error::UnsupportedAlgebra(alg.to_string())),
    }
}

/// Partition solution on a grid discretization of `C[0,1]`; the
/// all-singletons partition gives the canonical `S(x) = 1 + ρx`.
pub fn grid_cinterval_solution(grid: Vec<f64>, rho_values: Vec<f64>, parts: Vec<Vec<usize>>) -> Result<GsSolution> {
    let alg = AlgebraDescriptor::grid(grid)?;
    if rho_values.len() != alg.dim() {
        return Err(Error::input("rho", "one value per grid point"));
    }
    let spec = PartitionSpec::new(parts, rho_values)?;
    if spec.parts().iter().all(|p| p.len() == 1) {
        let rho = Element::new(alg, spec.rho().to_vec())?;
        return Ok(GsSolution::canonical(rho));
    }
    GsSolution::partition(alg, spec)
}
