use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which class of difference sits in a denominator.
///
/// Indices are stored 0-based and displayed 1-based, matching the
/// mathematical notation and the CLI's index convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferencePair {
    /// `q_i - r_j`
    QMinusR { i: usize, j: usize },
    /// `q_i - q_k`, `i < k`
    QMinusQ { i: usize, k: usize },
    /// `r_l - r_j`, `j < l`
    RMinusR { l: usize, j: usize },
    /// The spectral parameter itself in the bare kernel.
    Lambda,
}

impl fmt::Display for DifferencePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DifferencePair::QMinusR { i, j } => write!(f, "q_{} - r_{}", i + 1, j + 1),
            DifferencePair::QMinusQ { i, k } => write!(f, "q_{} - q_{}", i + 1, k + 1),
            DifferencePair::RMinusR { l, j } => write!(f, "r_{} - r_{}", l + 1, j + 1),
            DifferencePair::Lambda => write!(f, "lambda"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular denominator at {pair}: value {value}, distance to nearest kernel zero {distance:e}")]
    SingularDifference {
        pair: DifferencePair,
        value: Complex64,
        distance: f64,
    },

    /// `sigma(lambda_k)` vanishes. Movable by shifting lambda, unlike a
    /// singular input difference.
    #[error("lambda chain singularity at k = {k}: lambda_k = {value}, distance to nearest kernel zero {distance:e}")]
    LambdaChainSingular {
        k: usize,
        value: Complex64,
        distance: f64,
    },

    #[error("argument {value} lies within {distance:e} of a lattice point")]
    NearLattice { value: Complex64, distance: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("theta series did not reach tolerance within {terms} terms")]
    SeriesNotConverged { terms: usize },

    #[error("elimination breakdown at pivot {pivot}")]
    Breakdown { pivot: usize },

    #[error("index set: {0}")]
    IndexSet(String),
}

impl Error {
    /// True for every error that comes from a kernel zero in a denominator.
    pub fn is_singularity(&self) -> bool {
        matches!(
            self,
            Error::SingularDifference { .. }
                | Error::LambdaChainSingular { .. }
                | Error::NearLattice { .. }
                | Error::Breakdown { .. }
        )
    }
}
