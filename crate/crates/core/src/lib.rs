//! Finite-outcome quantum measurements (POVMs) and their post-processing order.
//!
//! The crate is organised bottom-up:
//!
//! - [`hermitian`]: dense complex matrices, Hermitian spectral calculus, vectorization
//!   and tensor utilities.
//! - [`povm`]: validated measurements, simple representatives, standard families and the
//!   JSON file format.
//! - [`postproc`]: the post-processing preorder decided by linear programming.
//! - [`morphisms`]: quadratic order morphisms, most importantly the generalized Fisher
//!   information map `F_rho`.
//! - [`dominance`]: the height function (minimal trace of a PSD upper bound) and its dual.
//! - [`incompat`]: incompatibility verdicts, joint-measurement oracle and the
//!   Fermat-Torricelli benchmark for qubit triples.
//! - [`scenarios`]: parameter scans producing CSV tables.
//!
//! Vectorization convention: `|E>` stacks the columns of `E`, so entry `i + d*j` of the
//! vector is `E[i, j]`. Every `d^2 x d^2` object in the crate uses it.

#![forbid(unsafe_code)]

pub mod dominance;
pub mod error;
pub mod hermitian;
pub mod incompat;
pub mod morphisms;
pub mod postproc;
pub mod povm;
pub mod scenarios;

pub use error::{Error, Result};
pub use hermitian::{ComplexMatrix, HermitianMatrix, SuperVector, C64};
pub use povm::Povm;
