//! Gauss decompositions of sigma-kernel Cauchy-like matrices in closed form,
//! with brute-force oracles for checking them.

// `!(x > margin)` is how NaN fails a check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod document;
pub mod error;
pub mod gauss_decomposition;
pub mod matrix;
pub mod matrix_builder;
pub mod oracle;
pub mod sampling;
pub mod special_functions;

pub use error::{DifferencePair, Error, Result};
pub use gauss_decomposition::{DecompositionResult, FactorOrder, Method};
pub use matrix::{DenseMatrix, TriangularFactor, TriangularShape};
pub use matrix_builder::{CauchyProblem, Lambda, LambdaChain};
pub use special_functions::{EvalOptions, LatticeParams, SigmaKernel};
