//! Standalone constructions: the roots of `e^ω = 1 + ω`, the triple
//! description of solutions, and solutions built from idempotents.

pub mod idempotent;
pub mod st;
pub mod wj;

pub use idempotent::idempotent_solution;
pub use st::{st_roots, st_scan, xi_root, y_of, StSolution, XiRoot};
pub use wj::{wj_build_s, wj_check, wj_extract, wj_verify, WjCheck, WjOracle, WjTriple};
