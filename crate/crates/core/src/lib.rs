//! Numerical toolkit for the Gołąb–Schinzel equation `S(x + S(x)y) = S(x)S(y)`
//! over finite-dimensional commutative Banach algebras.
//!
//! Solutions are represented by closed forms ([`GsSolution`]); the crate
//! evaluates them, checks the group and Goldie identities by sampling,
//! analyses the structure of Euclidean solutions, runs the exponential
//! tilting calculus, and hosts a few standalone constructions.

pub mod algebra;
pub mod checks;
pub mod error;
pub mod json;
pub mod sampling;
pub mod scalar;
pub mod solution;
pub mod special;
pub mod structure;
pub mod tilt;

pub use algebra::{AlgebraDescriptor, AlgebraKind, Element, Spectrum};
pub use checks::{
    check_omega_homogeneity, decomposition_check, dichotomy_check, popa_isomorphism_check, verify_gs,
    DecompositionReport, DichotomyReport, GoldieResidualReport,
};
pub use error::{Error, Result};
pub use solution::{DegenerateForm, GsSolution, Variant};
pub use special::{
    idempotent_solution, st_roots, st_scan, wj_build_s, wj_check, wj_extract, wj_verify, xi_root, StSolution, WjCheck,
    WjOracle, WjTriple, XiRoot,
};
pub use structure::{
    analyze, classify_2d, factorize, grid_cinterval_solution, kernel_subspace, recover_partition, validate_sigma,
    Factor,
};
pub use structure::{PartitionSpec, SigmaMatrix, StructureReport, TwoDClass, TwoDClassification};
pub use tilt::{
    lambda_scale, radiality_check, ratio_limit_check, tilt_inverse, tilt_inverse_report, tilt_solve_fixed_point,
    tilt_t, tilt_t_scaled, unboundedness_direction, Direction, RatioPoint, TiltInverseReport, TiltResult,
    UnboundednessVerdict,
};
