//! Structure-preserving decompositions for linear quantum stochastic
//! systems.
//!
//! The crate factors even-dimensional real matrices with respect to the
//! symplectic form `J_n = I_n ⊗ [[0, 1], [-1, 0]]`:
//!
//! * [`sympqr::symplectic_qr`] writes `V = S Y` with `S` symplectic and `Y`
//!   upper 2x2 block triangular, when every leading skew-Gram prefix of `V`
//!   is nonsingular.
//! * [`sympschur::symplectic_schur`] writes `A = S⁻¹ U S` with `U` lower
//!   2x2 block triangular, for admissible `A`.
//! * [`qsys::cascade_realize`] uses the Schur transform to rewrite a
//!   physically realizable system as a pure cascade of one-mode
//!   oscillators with the same transfer function.

pub mod error;
pub mod io;
pub mod linalg;
pub mod qsys;
pub mod realjordan;
pub mod sympqr;
pub mod sympschur;

pub mod cli;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, RealMatrix};
