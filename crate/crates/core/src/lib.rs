//! Group and Drazin inverses of dense complex matrices, together with a
//! harness that checks closed-form group-inverse formulas for sums of
//! λ-commuting elements and for 2×2 block matrices against a direct
//! numerical computation.
//!
//! Module map:
//!
//! - [`matrix`]: the [`ComplexMatrix`] carrier and [`ToleranceProfile`]
//! - [`linalg`]: numerical rank, full-rank factorization, inverse, Pierce blocks
//! - [`spectral`]: group inverse, Drazin inverse, spectral idempotent, Cline transfer
//! - [`sums`]: additive formulas for λ-commuting pairs
//! - [`blocks`]: block-matrix hypotheses and formulas
//! - [`forge`]: seeded generators of instances satisfying each hypothesis set
//! - [`harness`]: trial orchestration, verdicts, reports and counterexamples
//! - [`io`]: JSON file formats

pub mod blocks;
pub mod error;
pub mod forge;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod spectral;
pub mod sums;

pub use error::{Error, Result};
pub use matrix::{relative_residual, ComplexMatrix, ToleranceProfile};
