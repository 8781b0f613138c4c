//! Sigma-like kernels, the Weierstrass ℘ function and identity residuals.

mod identities;
mod kernel;
mod lattice;

pub use identities::{
    quasi_period_residual, three_term_residual, wp_sigma_residual, HalfPeriod, RESIDUAL_FLOOR,
};
pub use kernel::{wp_eval, ModifiedKernel, SigmaKernel};
pub use lattice::{LatticeParams, MAX_NOME};

use crate::error::{Error, Result};

/// Numerical knobs shared by every evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Relative size below which a theta-series term ends the sum.
    pub series_tolerance: f64,
    pub max_terms: usize,
    /// Denominators whose argument lies this close to a kernel zero are
    /// rejected.
    pub singularity_margin: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            series_tolerance: 1e-16,
            max_terms: 64,
            singularity_margin: 1e-9,
        }
    }
}

impl EvalOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_tolerance > 0.0) {
            return Err(Error::InvalidArgument(
                "options: series_tolerance must be positive".into(),
            ));
        }
        if self.max_terms < 4 {
            return Err(Error::InvalidArgument(
                "options: max_terms must be at least 4".into(),
            ));
        }
        if !(self.singularity_margin > 0.0) {
            return Err(Error::InvalidArgument(
                "options: singularity_margin must be positive".into(),
            ));
        }
        Ok(())
    }
}
