//! Period lattice data and the odd theta series behind the elliptic kernel.
//!
//! The lattice is spanned by `2ω₁` and `2ω₃ = 2τω₁` with `Im τ > 0`. Sigma is
//! evaluated as
//!
//! ```text
//! σ(z) = (2ω₁/π) · exp(η₁ z² / (2ω₁)) · θ₁(v) / θ₁'(0),    v = π z / (2ω₁)
//! ```
//!
//! after reducing `z` into the period cell centred at the origin. The common
//! factor `2 q^{1/4}` of the theta series cancels in the ratio and is never
//! formed, so the cached coefficients are `(-1)^n q^{n(n+1)}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::EvalOptions;
use crate::error::{Error, Result};

/// Largest admissible `|nome|`. Past this the default term budget cannot
/// reach the default series tolerance.
pub const MAX_NOME: f64 = 0.95;

const MAX_CACHED_TERMS: usize = 128;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeParams {
    omega1: Complex64,
    tau: Complex64,
    omega3: Complex64,
    nome: Complex64,
    eta1: Complex64,
    eta3: Complex64,
    coeffs: Vec<Complex64>,
    theta_prime0: Complex64,
}

/// Odd theta sum `Σ c_n sin((2n+1)v)` and its first two derivatives in `v`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ThetaSums {
    pub value: Complex64,
    pub first: Complex64,
    pub second: Complex64,
}

impl LatticeParams {
    pub fn new(omega1: Complex64, tau: Complex64) -> Result<Self> {
        if !(omega1.is_finite() && tau.is_finite()) {
            return Err(Error::InvalidArgument(
                "lattice: omega1 and tau must be finite".into(),
            ));
        }
        if omega1.norm() == 0.0 {
            return Err(Error::InvalidArgument(
                "lattice: omega1 must be nonzero".into(),
            ));
        }
        if tau.im <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lattice: Im(tau) must be positive, got tau = {tau}"
            )));
        }
        let nome = (I * PI * tau).exp();
        if nome.norm() > MAX_NOME {
            return Err(Error::InvalidArgument(format!(
                "lattice: |nome| = {:.6} exceeds the supported maximum {MAX_NOME}",
                nome.norm()
            )));
        }

        let mut coeffs = Vec::new();
        for n in 0..MAX_CACHED_TERMS {
            let k = (n * (n + 1)) as f64;
            let mag = (-PI * tau.im * k).exp();
            if n > 0 && mag < 1e-300 {
                break;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            coeffs.push(sign * (I * PI * tau * k).exp());
        }

        let (mut d1, mut d3) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (n, c) in coeffs.iter().enumerate() {
            let w = (2 * n + 1) as f64;
            d1 += c * w;
            d3 += c * (w * w * w);
        }
        // -θ₁'''(0)/θ₁'(0) from the logarithmic derivative at the origin.
        let eta1 = PI * PI / (12.0 * omega1) * d3 / d1;
        let omega3 = tau * omega1;
        // Legendre relation η₁ω₃ − η₃ω₁ = iπ/2.
        let eta3 = (eta1 * omega3 - I * (PI / 2.0)) / omega1;

        Ok(Self {
            omega1,
            tau,
            omega3,
            nome,
            eta1,
            eta3,
            coeffs,
            theta_prime0: d1,
        })
    }

    /// Builds the lattice from a nome `q = exp(iπτ)` using the principal
    /// logarithm for `τ`.
    pub fn from_nome(omega1: Complex64, nome: Complex64) -> Result<Self> {
        let r = nome.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "lattice: nome must satisfy 0 < |nome| < 1, got {nome}"
            )));
        }
        let tau = -I * nome.ln() / PI;
        Self::new(omega1, tau)
    }

    pub fn omega1(&self) -> Complex64 {
        self.omega1
    }

    pub fn omega3(&self) -> Complex64 {
        self.omega3
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn nome(&self) -> Complex64 {
        self.nome
    }

    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }

    pub fn eta3(&self) -> Complex64 {
        self.eta3
    }

    /// Real coordinates `(s, t)` with `z = 2sω₁ + 2tω₃`.
    pub fn lattice_coordinates(&self, z: Complex64) -> (f64, f64) {
        let x = z / (2.0 * self.omega1);
        let t = x.im / self.tau.im;
        let s = x.re - t * self.tau.re;
        (s, t)
    }

    pub fn lattice_point(&self, m: f64, n: f64) -> Complex64 {
        2.0 * m * self.omega1 + 2.0 * n * self.omega3
    }

    /// Distance from `z` to the nearest point `2mω₁ + 2nω₃`.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        let (s, t) = self.lattice_coordinates(z);
        if !(s.is_finite() && t.is_finite()) {
            return f64::NAN;
        }
        let (m0, n0) = (s.round(), t.round());
        let mut best = f64::INFINITY;
        // Rounding the coordinates can miss the nearest point on skewed
        // lattices; a small neighbourhood covers it.
        for dm in -2..=2 {
            for dn in -2..=2 {
                let w = self.lattice_point(m0 + dm as f64, n0 + dn as f64);
                best = best.min((z - w).norm());
            }
        }
        best
    }

    /// Splits `z = z0 + 2mω₁ + 2nω₃` with `z0` in the centred period cell.
    pub(crate) fn reduce(&self, z: Complex64) -> Result<(Complex64, i64, i64)> {
        let (s, t) = self.lattice_coordinates(z);
        let (m, n) = (s.round(), t.round());
        if !(m.is_finite() && n.is_finite()) || m.abs() > 1e15 || n.abs() > 1e15 {
            return Err(Error::Range(format!(
                "argument {z} too far from the period cell"
            )));
        }
        let z0 = z - self.lattice_point(m, n);
        Ok((z0, m as i64, n as i64))
    }

    pub(crate) fn theta_sums(
        &self,
        v: Complex64,
        opts: &EvalOptions,
        derivatives: bool,
    ) -> Result<ThetaSums> {
        let two_cos = 2.0 * (2.0 * v).cos();
        let (mut s_prev, mut s_cur) = (-v.sin(), v.sin());
        let (mut c_prev, mut c_cur) = (v.cos(), v.cos());
        let zero = Complex64::new(0.0, 0.0);
        let mut sums = ThetaSums {
            value: zero,
            first: zero,
            second: zero,
        };

        let limit = opts.max_terms.min(self.coeffs.len());
        let mut converged = limit == self.coeffs.len();
        for (n, c) in self.coeffs.iter().take(limit).enumerate() {
            if n > 0 {
                let s_next = two_cos * s_cur - s_prev;
                s_prev = s_cur;
                s_cur = s_next;
                if derivatives {
                    let c_next = two_cos * c_cur - c_prev;
                    c_prev = c_cur;
                    c_cur = c_next;
                }
            }
            let w = (2 * n + 1) as f64;
            let term = c * s_cur;
            sums.value += term;
            let mut small = term.norm() <= opts.series_tolerance * sums.value.norm();
            if derivatives {
                let t1 = c * c_cur * w;
                let t2 = -term * (w * w);
                sums.first += t1;
                sums.second += t2;
                small = small
                    && t1.norm() <= opts.series_tolerance * sums.first.norm()
                    && t2.norm() <= opts.series_tolerance * sums.second.norm();
            }
            if n > 0 && small {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::SeriesNotConverged { terms: limit });
        }
        Ok(sums)
    }

    /// Sigma from the theta series at `z` as given, with no reduction into
    /// the period cell. Slower to converge away from the cell; kept separate
    /// so that quasi-periodicity can be checked independently of the
    /// reduction formula.
    pub fn sigma_unreduced(&self, z: Complex64, opts: &EvalOptions) -> Result<Complex64> {
        let v = z * (PI / (2.0 * self.omega1));
        let sums = self.theta_sums(v, opts, false)?;
        let exponent = self.eta1 * z * z / (2.0 * self.omega1);
        finish(
            2.0 * self.omega1 / PI * sums.value / self.theta_prime0,
            exponent,
            z,
        )
    }

    pub fn sigma(&self, z: Complex64, opts: &EvalOptions) -> Result<Complex64> {
        let (z0, m, n) = self.reduce(z)?;
        let v = z0 * (PI / (2.0 * self.omega1));
        let sums = self.theta_sums(v, opts, false)?;
        // σ(z0 + 2w) = (-1)^{m+n+mn} exp(2η_w (z0 + w)) σ(z0)
        let w = m as f64 * self.omega1 + n as f64 * self.omega3;
        let eta_w = m as f64 * self.eta1 + n as f64 * self.eta3;
        let exponent = self.eta1 * z0 * z0 / (2.0 * self.omega1) + 2.0 * eta_w * (z0 + w);
        let parity = (m + n + m * n).rem_euclid(2);
        let sign = if parity == 0 { 1.0 } else { -1.0 };
        finish(
            sign * 2.0 * self.omega1 / PI * sums.value / self.theta_prime0,
            exponent,
            z,
        )
    }

    /// Weierstrass ℘ from the second logarithmic derivative of the theta
    /// representation.
    pub fn wp(&self, z: Complex64, opts: &EvalOptions) -> Result<Complex64> {
        let distance = self.distance_to_lattice(z);
        if !(distance > opts.singularity_margin) {
            return Err(Error::NearLattice { value: z, distance });
        }
        let (z0, _, _) = self.reduce(z)?;
        let scale = PI / (2.0 * self.omega1);
        let sums = self.theta_sums(z0 * scale, opts, true)?;
        let log2 = (sums.second * sums.value - sums.first * sums.first) / (sums.value * sums.value);
        let value = -self.eta1 / self.omega1 - scale * scale * log2;
        if !value.is_finite() {
            return Err(Error::Range(format!("wp({z}) is not finite")));
        }
        Ok(value)
    }
}

fn finish(mantissa: Complex64, exponent: Complex64, z: Complex64) -> Result<Complex64> {
    if exponent.re > 709.0 {
        return Err(Error::Range(format!(
            "sigma({z}): exponential prefactor overflows (Re exponent = {:.3e})",
            exponent.re
        )));
    }
    let value = mantissa * exponent.exp();
    if !value.is_finite() {
        return Err(Error::Range(format!("sigma({z}) is not finite")));
    }
    Ok(value)
}
