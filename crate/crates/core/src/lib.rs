//! Quaternion matrices and chained Sylvester-type equations
//!
//! ```text
//! A_i X_i + Y_i B_i + C_i Z_i D_i + F_i Z_{i+1} G_i = E_i,   i = 1..k
//! ```
//!
//! [`sylvester::check_system`] decides consistency through rank equalities,
//! [`sylvester::solve_system`] builds a solution by recursing on the
//! equations satisfied by the free parameters, and [`phi`] specializes both
//! to φ-Hermitian systems under a nonstandard involution. Ranks, Moore–Penrose
//! inverses and projectors come from the complex adjoint ([`linalg`]).

pub mod block;
pub mod error;
pub mod gen;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod phi;
pub mod quat;
pub mod sylvester;

pub use error::{Error, Inconsistency};
pub use matrix::QuatMatrix;
pub use quat::{Involution, Quaternion};
