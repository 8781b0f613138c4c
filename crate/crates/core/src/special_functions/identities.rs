//! Residuals of the functional identities every kernel must satisfy. They
//! serve as correctness oracles for the kernels themselves.

use num_complex::Complex64;

use super::{wp_eval, EvalOptions, LatticeParams, SigmaKernel};
use crate::error::Result;

/// Keeps relative residuals finite when every term vanishes.
pub const RESIDUAL_FLOOR: f64 = 1e-300;

/// Relative residual of the three-term identity
///
/// ```text
/// σ(z+a)σ(z−a)σ(b+c)σ(b−c) + σ(z+b)σ(z−b)σ(c+a)σ(c−a) + σ(z+c)σ(z−c)σ(a+b)σ(a−b) = 0
/// ```
///
/// as `|T1 + T2 + T3| / max(|T1|, |T2|, |T3|, floor)`.
pub fn three_term_residual(
    kernel: &SigmaKernel,
    z: Complex64,
    a: Complex64,
    b: Complex64,
    c: Complex64,
    opts: &EvalOptions,
) -> Result<f64> {
    let s = |x: Complex64| kernel.sigma(x, opts);
    let t1 = s(z + a)? * s(z - a)? * s(b + c)? * s(b - c)?;
    let t2 = s(z + b)? * s(z - b)? * s(c + a)? * s(c - a)?;
    let t3 = s(z + c)? * s(z - c)? * s(a + b)? * s(a - b)?;
    let scale = t1.norm().max(t2.norm()).max(t3.norm()).max(RESIDUAL_FLOOR);
    Ok((t1 + t2 + t3).norm() / scale)
}

/// Relative residual of `℘(x) − ℘(y) = σ(y+x)σ(y−x) / (σ(x)²σ(y)²)`,
/// normalized by the largest of `|℘(x)|`, `|℘(y)|` and the right-hand side.
pub fn wp_sigma_residual(
    kernel: &SigmaKernel,
    x: Complex64,
    y: Complex64,
    opts: &EvalOptions,
) -> Result<f64> {
    let (px, py) = (wp_eval(kernel, x, opts)?, wp_eval(kernel, y, opts)?);
    let s = |z: Complex64| kernel.sigma(z, opts);
    let (sx, sy) = (s(x)?, s(y)?);
    let rhs = s(y + x)? * s(y - x)? / (sx * sx * sy * sy);
    let scale = px.norm().max(py.norm()).max(rhs.norm()).max(RESIDUAL_FLOOR);
    Ok(((px - py) - rhs).norm() / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPeriod {
    Omega1,
    Omega3,
}

/// Relative residual of `σ(z + 2ω) = −exp(2η(z + ω)) σ(z)`.
///
/// Both sides use the unreduced theta series, so the check does not lean on
/// the reduction formula used by ordinary evaluation.
pub fn quasi_period_residual(
    params: &LatticeParams,
    z: Complex64,
    direction: HalfPeriod,
    opts: &EvalOptions,
) -> Result<f64> {
    let (omega, eta) = match direction {
        HalfPeriod::Omega1 => (params.omega1(), params.eta1()),
        HalfPeriod::Omega3 => (params.omega3(), params.eta3()),
    };
    let shifted = params.sigma_unreduced(z + 2.0 * omega, opts)?;
    let base = params.sigma_unreduced(z, opts)?;
    let predicted = -(2.0 * eta * (z + omega)).exp() * base;
    let scale = shifted.norm().max(predicted.norm()).max(RESIDUAL_FLOOR);
    Ok((shifted - predicted).norm() / scale)
}
