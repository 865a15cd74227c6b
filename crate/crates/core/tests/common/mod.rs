#![allow(dead_code)]

use popa_core::{AlgebraDescriptor, Element, GsSolution, PartitionSpec, SigmaMatrix};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn h(d: usize) -> AlgebraDescriptor {
    AlgebraDescriptor::hadamard(d).unwrap()
}

pub fn el(c: &[f64]) -> Element {
    Element::new(h(c.len()), c.to_vec()).unwrap()
}

pub fn random_element(rng: &mut ChaCha8Rng, alg: &AlgebraDescriptor, r: f64) -> Element {
    let c = (0..alg.dim()).map(|_| rng.random_range(-r..=r)).collect();
    Element::new(alg.clone(), c).unwrap()
}

/// Random partition of `0..d` into parts given as zero-based index lists.
pub fn random_parts(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..d).collect();
    idx.shuffle(rng);
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for i in idx {
        if parts.is_empty() || rng.random_bool(0.45) {
            parts.push(vec![i]);
        } else {
            let k = rng.random_range(0..parts.len());
            parts[k].push(i);
        }
    }
    parts
}

/// Coefficient with magnitude in `[lo, hi]` and random sign.
pub fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let m = rng.random_range(lo..=hi);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

pub fn random_partition_spec(rng: &mut ChaCha8Rng, d: usize) -> PartitionSpec {
    let parts = random_parts(rng, d);
    let rho = (0..d).map(|_| signed(rng, 0.5, 2.0)).collect();
    PartitionSpec::new(parts, rho).unwrap()
}

pub fn random_partition_solution(rng: &mut ChaCha8Rng, d: usize) -> GsSolution {
    GsSolution::partition(h(d), random_partition_spec(rng, d)).unwrap()
}

/// A random partition solution with at least one part of size two or more,
/// so that `null(Σ)` is non-trivial.
pub fn random_partition_with_kernel(rng: &mut ChaCha8Rng, d: usize) -> GsSolution {
    loop {
        let spec = random_partition_spec(rng, d);
        if spec.parts().iter().any(|p| p.len() > 1) {
            return GsSolution::partition(h(d), spec).unwrap();
        }
    }
}

pub fn sigma_of(spec: &PartitionSpec) -> SigmaMatrix {
    spec.induced_sigma()
}

pub fn codependent(s1: f64, s2: f64) -> GsSolution {
    GsSolution::partition(
        h(2),
        PartitionSpec::from_one_based(vec![vec![1, 2]], vec![s1, s2]).unwrap(),
    )
    .unwrap()
}

pub fn one_exp_pair() -> GsSolution {
    GsSolution::degenerate_exp(popa_core::DegenerateForm::OneExp, 0.0, 1.0, 0).unwrap()
}

pub fn exp_triple() -> GsSolution {
    GsSolution::exponential(SigmaMatrix::from_rows(&[vec![0.0; 3], vec![0.0; 3], vec![1.0, 1.0, 0.0]]).unwrap())
        .unwrap()
}

/// Rescales `u` so that `norm(γ(u)) <= cap`.
pub fn cap_gamma(sol: &GsSolution, u: &Element, cap: f64) -> Element {
    let g = sol.gamma(u).unwrap().norm();
    if g > cap {
        u.scale(cap / g)
    } else {
        u.clone()
    }
}
