//! Certified bounds for quadratic assignment problems.
//!
//! The pipeline: parse an instance (A, B, C), lift the objective to
//! L_Q = [[0, −vec(C)ᵀ], [−vec(C), B⊗A]], restrict the SDP relaxation to
//! the face V̂RV̂ᵀ of the PSD cone that contains all permutation liftings,
//! and run a three-block ADMM over (R, Y, Z). The final dual iterate is
//! projected onto {Z : V̂ᵀZV̂ ⪯ 0} and evaluated in closed form to give a
//! lower bound valid by weak duality; the leading eigenvector of Y is
//! rounded to a permutation by exact linear assignment for an upper bound.

// force linking of the system BLAS/LAPACK used by ndarray and the lapack
// bindings
use openblas_src as _;

pub mod admm;
pub mod assign;
pub mod bounds;
pub mod error;
pub mod linalg;
pub mod qap;
pub mod relaxation;
pub mod report;

pub use error::{Error, Result};
