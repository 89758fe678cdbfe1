//! Matrix-free low-rank approximation with single-vector, small-block and
//! large-block Krylov methods.
//!
//! Every solver touches the input only through a [`GramOperator`], which
//! applies `A Aᵀ` and counts one matvec per vector. The [`metrics`] module
//! measures the resulting bases against exact references, and [`harness`]
//! runs the seeded multi-trial sweeps that produce the convergence CSVs.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod mtx;
pub mod operator;
pub mod rng;
pub mod solvers;
pub mod spectra;

pub use error::{Error, Result};
pub use linalg::OrthonormalBasis;
pub use operator::{DiagonalPerturbation, GramOperator, LinearMap, PerturbationRoute};
pub use solvers::{OrthoPolicy, SolverConfig, SolverResult, StartBlock};
pub use spectra::SpectrumSpec;
