use crate::algebra::{AlgebraDescriptor, Element};
use crate::error::Result;
use crate::solution::GsSolution;

/// `S(x) = 1 + Σ_i σ(e_i x) e_i` with `σ(z) = Σ_k sigma_k z_k`.
///
/// Fails with `NotOrthogonalIdempotents` unless `e_i e_j = δ_ij e_i` to 1e-12.
pub fn idempotent_solution(
    algebra: AlgebraDescriptor,
    idempotents: Vec<Element>,
    sigma: Vec<f64>,
) -> Result<GsSolution> {
    GsSolution::idempotent_built(algebra, idempotents, sigma)
}
