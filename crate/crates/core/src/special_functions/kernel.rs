use std::f64::consts::PI;

use num_complex::Complex64;

use super::{EvalOptions, LatticeParams};
use crate::error::{Error, Result};

/// An odd entire function satisfying the three-term sigma identity.
///
/// `Trigonometric` and `Hyperbolic` are the undressed degenerations
/// `sin(az)/a` and `sinh(az)/a`; the dressed forms with a Gaussian factor are
/// available through [`SigmaKernel::modified`].
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaKernel {
    Rational,
    Trigonometric { scale: Complex64 },
    Hyperbolic { scale: Complex64 },
    Elliptic(LatticeParams),
    Modified(ModifiedKernel),
}

/// `exp(α + βz²) · base(z)`. The base is never itself modified.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedKernel {
    base: Box<SigmaKernel>,
    alpha: Complex64,
    beta: Complex64,
}

impl ModifiedKernel {
    pub fn base(&self) -> &SigmaKernel {
        &self.base
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }
}

impl SigmaKernel {
    pub fn trigonometric(scale: Complex64) -> Result<Self> {
        check_scale("trigonometric", scale)?;
        Ok(SigmaKernel::Trigonometric { scale })
    }

    pub fn hyperbolic(scale: Complex64) -> Result<Self> {
        check_scale("hyperbolic", scale)?;
        Ok(SigmaKernel::Hyperbolic { scale })
    }

    pub fn elliptic(omega1: Complex64, tau: Complex64) -> Result<Self> {
        LatticeParams::new(omega1, tau).map(SigmaKernel::Elliptic)
    }

    /// Wraps `base` in an exponential dressing. Wrapping an already modified
    /// kernel composes the exponents instead of nesting.
    pub fn modified(base: SigmaKernel, alpha: Complex64, beta: Complex64) -> Self {
        match base {
            SigmaKernel::Modified(inner) => SigmaKernel::Modified(ModifiedKernel {
                base: inner.base,
                alpha: inner.alpha + alpha,
                beta: inner.beta + beta,
            }),
            other => SigmaKernel::Modified(ModifiedKernel {
                base: Box::new(other),
                alpha,
                beta,
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SigmaKernel::Rational | SigmaKernel::Elliptic(_) => Ok(()),
            SigmaKernel::Trigonometric { scale } => check_scale("trigonometric", *scale),
            SigmaKernel::Hyperbolic { scale } => check_scale("hyperbolic", *scale),
            SigmaKernel::Modified(m) => {
                if matches!(*m.base, SigmaKernel::Modified(_)) {
                    return Err(Error::InvalidArgument(
                        "modified kernel may not wrap another modified kernel".into(),
                    ));
                }
                if !(m.alpha.is_finite() && m.beta.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "modified kernel: alpha and beta must be finite".into(),
                    ));
                }
                m.base.validate()
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SigmaKernel::Rational => "rational",
            SigmaKernel::Trigonometric { .. } => "trig",
            SigmaKernel::Hyperbolic { .. } => "hyperbolic",
            SigmaKernel::Elliptic(_) => "elliptic",
            SigmaKernel::Modified(_) => "modified",
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, SigmaKernel::Rational)
    }

    /// The lattice of a bare elliptic kernel.
    pub fn lattice(&self) -> Option<&LatticeParams> {
        match self {
            SigmaKernel::Elliptic(p) => Some(p),
            _ => None,
        }
    }

    /// Evaluates the kernel. Total away from overflow; a value that would
    /// overflow is reported as [`Error::Range`].
    pub fn sigma(&self, z: Complex64, opts: &EvalOptions) -> Result<Complex64> {
        let value = match self {
            SigmaKernel::Rational => z,
            SigmaKernel::Trigonometric { scale } => (scale * z).sin() / scale,
            SigmaKernel::Hyperbolic { scale } => (scale * z).sinh() / scale,
            SigmaKernel::Elliptic(p) => return p.sigma(z, opts),
            SigmaKernel::Modified(m) => {
                let base = m.base.sigma(z, opts)?;
                let exponent = m.alpha + m.beta * z * z;
                if exponent.re > 709.0 {
                    return Err(Error::Range(format!(
                        "modified sigma({z}): exponential factor overflows"
                    )));
                }
                exponent.exp() * base
            }
        };
        if !value.is_finite() {
            return Err(Error::Range(format!(
                "{} sigma({z}) is not finite",
                self.name()
            )));
        }
        Ok(value)
    }

    /// Replaces every entry of `values` by its kernel value.
    pub fn sigma_in_place(&self, values: &mut [Complex64], opts: &EvalOptions) -> Result<()> {
        if self.is_rational() {
            if let Some(z) = values.iter().find(|z| !z.is_finite()) {
                return Err(Error::Range(format!("rational sigma({z}) is not finite")));
            }
            return Ok(());
        }
        for z in values.iter_mut() {
            *z = self.sigma(*z, opts)?;
        }
        Ok(())
    }

    /// Whether `z` is farther than `margin` from every zero. Equivalent to
    /// `nearest_zero_distance(z) > margin`, without the square root where the
    /// zero set is just the origin.
    #[inline]
    pub fn clears_zeros(&self, z: Complex64, margin: f64) -> bool {
        let base = match self {
            SigmaKernel::Modified(m) => &m.base,
            other => other,
        };
        if base.is_rational() {
            z.norm_sqr() > margin * margin || z.norm() > margin
        } else {
            self.nearest_zero_distance(z) > margin
        }
    }

    /// Distance from `z` to the zero set of the kernel.
    pub fn nearest_zero_distance(&self, z: Complex64) -> f64 {
        match self {
            SigmaKernel::Rational => z.norm(),
            SigmaKernel::Trigonometric { scale } => {
                let step = Complex64::new(PI, 0.0) / scale;
                nearest_on_line(z, step)
            }
            SigmaKernel::Hyperbolic { scale } => {
                let step = Complex64::new(0.0, PI) / scale;
                nearest_on_line(z, step)
            }
            SigmaKernel::Elliptic(p) => p.distance_to_lattice(z),
            SigmaKernel::Modified(m) => m.base.nearest_zero_distance(z),
        }
    }
}

fn check_scale(kind: &str, scale: Complex64) -> Result<()> {
    if !scale.is_finite() || scale.norm() == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "{kind} kernel: scale must be finite and nonzero, got {scale}"
        )));
    }
    Ok(())
}

/// Distance from `z` to `{k · step : k ∈ ℤ}`.
fn nearest_on_line(z: Complex64, step: Complex64) -> f64 {
    let k = (z / step).re.round();
    if !k.is_finite() {
        return f64::NAN;
    }
    (z - k * step).norm()
}

/// Weierstrass ℘ for an elliptic kernel.
pub fn wp_eval(kernel: &SigmaKernel, z: Complex64, opts: &EvalOptions) -> Result<Complex64> {
    match kernel.lattice() {
        Some(p) => p.wp(z, opts),
        None => Err(Error::InvalidArgument(format!(
            "wp is defined only for the elliptic kernel, got {}",
            kernel.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> SigmaKernel {
        SigmaKernel::elliptic(c(0.5, 0.0), c(0.0, 1.0)).unwrap()
    }

    #[test]
    fn rational_is_identity() {
        let z = c(3.0, 4.0);
        assert_eq!(
            SigmaKernel::Rational
                .sigma(z, &EvalOptions::default())
                .unwrap(),
            z
        );
    }

    #[test]
    fn elliptic_is_normalized_at_tiny_argument() {
        let opts = EvalOptions::default();
        for k in [
            square(),
            SigmaKernel::elliptic(c(0.7, 0.1), c(0.3, 1.1)).unwrap(),
            SigmaKernel::Elliptic(LatticeParams::from_nome(c(4.0, 0.0), c(0.7, 0.0)).unwrap()),
        ] {
            let z = c(1e-6, 0.0);
            let s = k.sigma(z, &opts).unwrap();
            assert!((s - z).norm() <= 1e-12 * z.norm(), "{s}");
        }
    }

    #[test]
    fn normalization_error_is_cubic() {
        let opts = EvalOptions::default();
        let k = square();
        for r in [1e-3, 1e-5] {
            for z in [c(r, 0.0), c(0.0, r), c(r, r) / 2f64.sqrt()] {
                let rel = (k.sigma(z, &opts).unwrap() / z - 1.0).norm();
                assert!(rel <= r * r * r, "z = {z}: {rel:e}");
            }
        }
    }

    #[test]
    fn in_place_matches_pointwise() {
        let opts = EvalOptions::default();
        let zs = [Complex64::new(0.3, 0.1), Complex64::new(-1.2, 0.7)];
        for kernel in [
            SigmaKernel::Rational,
            SigmaKernel::trigonometric(Complex64::new(1.3, 0.0)).unwrap(),
        ] {
            let mut batch = zs;
            kernel.sigma_in_place(&mut batch, &opts).unwrap();
            for (b, z) in batch.iter().zip(zs) {
                assert_eq!(*b, kernel.sigma(z, &opts).unwrap());
            }
        }
        let mut bad = [Complex64::new(f64::INFINITY, 0.0)];
        assert!(SigmaKernel::Rational
            .sigma_in_place(&mut bad, &opts)
            .is_err());
    }

    #[test]
    fn zero_distances() {
        assert_eq!(
            SigmaKernel::Rational.nearest_zero_distance(c(0.5, 0.0)),
            0.5
        );
        assert_eq!(square().nearest_zero_distance(c(1.0, 1.0)), 0.0);
        let trig = SigmaKernel::trigonometric(c(1.0, 0.0)).unwrap();
        // brute-force scan over the nearby zeros kπ
        let brute = (-5..=5)
            .map(|k| (c(3.0, 0.0) - c(k as f64 * PI, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        assert!((trig.nearest_zero_distance(c(3.0, 0.0)) - brute).abs() < 1e-15);
        assert!((brute - 0.14159265358979312).abs() < 1e-15);
        let hyp = SigmaKernel::hyperbolic(c(2.0, 0.0)).unwrap();
        assert!(
            (hyp.nearest_zero_distance(c(0.1, 1.6)) - c(0.1, 1.6 - PI / 2.0).norm()).abs() < 1e-15
        );
        let m = SigmaKernel::modified(trig.clone(), c(0.2, 0.0), c(0.1, 0.3));
        assert_eq!(
            m.nearest_zero_distance(c(3.0, 0.0)),
            trig.nearest_zero_distance(c(3.0, 0.0))
        );
    }

    #[test]
    fn modified_composes_instead_of_nesting() {
        let base = SigmaKernel::trigonometric(c(1.0, 0.0)).unwrap();
        let once = SigmaKernel::modified(base.clone(), c(0.1, 0.0), c(0.2, 0.0));
        let twice = SigmaKernel::modified(once, c(0.3, 0.0), c(0.0, 0.5));
        match &twice {
            SigmaKernel::Modified(m) => {
                assert_eq!(m.base(), &base);
                assert!((m.alpha() - c(0.4, 0.0)).norm() < 1e-16);
                assert_eq!(m.beta(), c(0.2, 0.5));
            }
            other => panic!("expected modified kernel, got {other:?}"),
        }
        twice.validate().unwrap();
    }

    #[test]
    fn modified_with_zero_exponents_matches_base() {
        let opts = EvalOptions::default();
        let base = square();
        let m = SigmaKernel::modified(base.clone(), c(0.0, 0.0), c(0.0, 0.0));
        for z in [c(0.3, 0.1), c(-0.2, 0.45), c(1.7, -0.9)] {
            let a = base.sigma(z, &opts).unwrap();
            let b = m.sigma(z, &opts).unwrap();
            assert!((a - b).norm() <= 1e-15 * a.norm());
        }
    }

    #[test]
    fn zero_scale_rejected() {
        assert!(SigmaKernel::trigonometric(c(0.0, 0.0)).is_err());
        assert!(SigmaKernel::hyperbolic(c(f64::NAN, 0.0)).is_err());
        assert!(SigmaKernel::Trigonometric { scale: c(0.0, 0.0) }
            .validate()
            .is_err());
    }

    #[test]
    fn trig_overflow_is_range_error() {
        let trig = SigmaKernel::trigonometric(c(1.0, 0.0)).unwrap();
        assert!(matches!(
            trig.sigma(c(0.0, 800.0), &EvalOptions::default()),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn wp_leading_laurent_term() {
        let opts = EvalOptions::default();
        let z = c(1e-3, 0.0);
        let wp = wp_eval(&square(), z, &opts).unwrap();
        let lead = 1.0 / (z * z);
        assert!((wp - lead).norm() <= 1e-8 * lead.norm());
    }

    #[test]
    fn wp_rejects_lattice_points_and_non_elliptic() {
        let opts = EvalOptions::default();
        match wp_eval(&square(), c(1.0, 1e-12), &opts) {
            Err(Error::NearLattice { distance, .. }) => assert!(distance < 1e-11),
            other => panic!("{other:?}"),
        }
        assert!(wp_eval(&SigmaKernel::Rational, c(0.3, 0.0), &opts).is_err());
    }
}
