//! Seeded sampling helpers shared by the verification routines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraDescriptor, Element};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the coordinate box `[-radius, radius]^dim`.
pub fn sample_box<R: Rng + ?Sized>(rng: &mut R, algebra: &AlgebraDescriptor, radius: f64) -> Element {
    let coords = (0..algebra.dim()).map(|_| rng.random_range(-radius..=radius)).collect();
    Element::from_raw(algebra, coords)
}
