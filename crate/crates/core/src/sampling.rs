//! Seeded random problem instances for the property and acceptance runs.
//!
//! Points are drawn uniformly from a parallelogram `s·e₁ + t·e₂`,
//! `s, t ∈ [−½, ½]`, sized to the kernel: the centred period cell for an
//! elliptic kernel, with its long edge capped at twice the short one.
//!
//! An instance is accepted only when every difference that appears in a
//! denominator, every chain value and every leading partial chain stays a
//! fixed distance from the kernel zeros, and the chain values stay inside
//! the doubled parallelogram. Chains that wander further reach arguments
//! where the kernel magnitude is extreme and the matrix too ill-conditioned
//! for any double-precision oracle.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix_builder::{CauchyProblem, Lambda};
use crate::special_functions::{EvalOptions, SigmaKernel};

pub type SeededRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 20_240_611;
pub const DEFAULT_SEPARATION: f64 = 0.05;
/// Chain values must satisfy `|s|, |t| ≤ CHAIN_EXTENT` in region coordinates.
pub const CHAIN_EXTENT: f64 = 1.0;
const MAX_ATTEMPTS: usize = 10_000;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Edge vectors of the sampling parallelogram.
pub fn sampling_region(kernel: &SigmaKernel) -> (Complex64, Complex64) {
    match kernel {
        SigmaKernel::Rational => (Complex64::new(2.0, 0.0), Complex64::new(0.0, 2.0)),
        SigmaKernel::Trigonometric { scale } | SigmaKernel::Hyperbolic { scale } => {
            (1.5 / scale, Complex64::new(0.0, 1.5) / scale)
        }
        SigmaKernel::Elliptic(p) => {
            // σ varies over dozens of orders of magnitude along the long
            // edge of a thin cell, so the long edge is capped at twice the
            // short one
            let (e1, e2) = (2.0 * p.omega1(), 2.0 * p.omega3());
            let (l1, l2) = (e1.norm(), e2.norm());
            (e1 * (2.0 * l2 / l1).min(1.0), e2 * (2.0 * l1 / l2).min(1.0))
        }
        SigmaKernel::Modified(m) => sampling_region(m.base()),
    }
}

/// Coordinates `(s, t)` of `z = s·e₁ + t·e₂` in the sampling parallelogram.
pub fn region_coordinates(kernel: &SigmaKernel, z: Complex64) -> (f64, f64) {
    let (e1, e2) = sampling_region(kernel);
    let det = e1.re * e2.im - e2.re * e1.im;
    (
        (z.re * e2.im - e2.re * z.im) / det,
        (e1.re * z.im - e1.im * z.re) / det,
    )
}

pub fn within_extent(kernel: &SigmaKernel, z: Complex64, extent: f64) -> bool {
    let (s, t) = region_coordinates(kernel, z);
    s.abs() <= extent && t.abs() <= extent
}

pub fn sample_point(rng: &mut impl Rng, kernel: &SigmaKernel) -> Complex64 {
    let (e1, e2) = sampling_region(kernel);
    let s: f64 = rng.random_range(-0.5..0.5);
    let t: f64 = rng.random_range(-0.5..0.5);
    s * e1 + t * e2
}

fn random_complex(rng: &mut impl Rng, radius: f64) -> Complex64 {
    Complex64::new(
        rng.random_range(-radius..radius),
        rng.random_range(-radius..radius),
    )
}

/// `exp(α + βz²)` dressing with `|Re|, |Im| ≤ 1` for both exponents.
pub fn random_modified(rng: &mut impl Rng, base: SigmaKernel) -> SigmaKernel {
    let alpha = random_complex(rng, 1.0);
    let beta = random_complex(rng, 1.0);
    SigmaKernel::modified(base, alpha, beta)
}

/// The elliptic lattices of the test grid as `(|nome|, ω₁)`. `τ` is purely
/// imaginary.
pub const ELLIPTIC_GRID: [(f64, f64); 3] = [(0.2, 1.0), (0.5, 2.0), (0.7, 4.0)];

pub fn elliptic_from_nome(nome: f64, omega1: f64) -> Result<SigmaKernel> {
    let tau = Complex64::new(0.0, -nome.ln() / std::f64::consts::PI);
    SigmaKernel::elliptic(Complex64::new(omega1, 0.0), tau)
}

/// One labelled kernel per family of the test grid. Modified kernels are
/// dressed elliptic and trigonometric kernels with seeded exponents.
pub fn kernel_grid(rng: &mut impl Rng) -> Result<Vec<(String, SigmaKernel)>> {
    let one = Complex64::new(1.0, 0.0);
    let mut grid = vec![
        ("rational".to_string(), SigmaKernel::Rational),
        ("trig".to_string(), SigmaKernel::trigonometric(one)?),
        ("hyperbolic".to_string(), SigmaKernel::hyperbolic(one)?),
    ];
    for (nome, omega1) in ELLIPTIC_GRID {
        grid.push((
            format!("elliptic(nome={nome})"),
            elliptic_from_nome(nome, omega1)?,
        ));
    }
    let base = elliptic_from_nome(0.2, 1.0)?;
    grid.push(("modified(elliptic)".to_string(), random_modified(rng, base)));
    grid.push((
        "modified(trig)".to_string(),
        random_modified(rng, SigmaKernel::trigonometric(one)?),
    ));
    Ok(grid)
}

fn well_separated(kernel: &SigmaKernel, z: Complex64, min_sep: f64) -> bool {
    kernel.nearest_zero_distance(z) >= min_sep
}

/// The chain `λ_0..λ_N` followed by the leading partial chains
/// `λ + Σ_{k≤m}(q_k − r_k)`.
pub fn chain_values(q: &[Complex64], r: &[Complex64], lambda: Complex64) -> Vec<Complex64> {
    let n = q.len();
    let mut out = Vec::with_capacity(2 * n + 1);
    let mut trailing = lambda;
    out.push(trailing);
    for k in (0..n).rev() {
        trailing += q[k] - r[k];
        out.push(trailing);
    }
    let mut leading = lambda;
    for k in 0..n {
        leading += q[k] - r[k];
        out.push(leading);
    }
    out
}

/// Every value whose distance from the kernel zeros controls the instance:
/// all `q_i − r_j`, `q_i − q_k`, `r_l − r_j` and the [`chain_values`].
pub fn controlled_values(
    q: &[Complex64],
    r: &[Complex64],
    lambda: Option<Complex64>,
) -> Vec<Complex64> {
    let n = q.len();
    let mut out = Vec::with_capacity(2 * n * n + 2 * n + 2);
    for i in 0..n {
        for j in 0..n {
            out.push(q[i] - r[j]);
            if i < j {
                out.push(q[i] - q[j]);
                out.push(r[i] - r[j]);
            }
        }
    }
    if let Some(lambda) = lambda {
        out.extend(chain_values(q, r, lambda));
    }
    out
}

/// A random instance of size `n` with every controlled value at least
/// `min_sep` from the kernel zeros and every chain value within
/// [`CHAIN_EXTENT`].
pub fn random_problem(
    rng: &mut impl Rng,
    kernel: &SigmaKernel,
    n: usize,
    lambda_at_infinity: bool,
    min_sep: f64,
) -> Result<CauchyProblem> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sampling: n must be positive".into(),
        ));
    }
    if lambda_at_infinity && !kernel.is_rational() {
        return Err(Error::InvalidArgument(
            "sampling: lambda = infinity needs the rational kernel".into(),
        ));
    }
    'attempt: for _ in 0..MAX_ATTEMPTS {
        let mut q: Vec<Complex64> = Vec::with_capacity(n);
        let mut r: Vec<Complex64> = Vec::with_capacity(n);
        for _ in 0..n {
            let (qi, ri) = (sample_point(rng, kernel), sample_point(rng, kernel));
            q.push(qi);
            r.push(ri);
            let fresh = q.len() - 1;
            let ok = (0..=fresh).all(|j| {
                well_separated(kernel, qi - r[j], min_sep)
                    && well_separated(kernel, q[j] - ri, min_sep)
                    && (j == fresh
                        || (well_separated(kernel, q[j] - qi, min_sep)
                            && well_separated(kernel, r[j] - ri, min_sep)))
            });
            if !ok {
                continue 'attempt;
            }
        }
        let lambda = if lambda_at_infinity {
            None
        } else {
            Some(sample_point(rng, kernel))
        };
        let chain_bounded = lambda.is_none_or(|l| {
            chain_values(&q, &r, l)
                .iter()
                .all(|&z| within_extent(kernel, z, CHAIN_EXTENT))
        });
        if chain_bounded
            && controlled_values(&q, &r, lambda)
                .iter()
                .all(|&z| well_separated(kernel, z, min_sep))
        {
            let lambda = lambda.map_or(Lambda::AtInfinity, Lambda::Finite);
            return CauchyProblem::new(q, r, lambda, kernel.clone(), EvalOptions::default());
        }
    }
    Err(Error::InvalidArgument(format!(
        "sampling: no admissible instance of size {n} after {MAX_ATTEMPTS} attempts"
    )))
}

/// Three arguments of the three-term identity for a given `z`, each
/// combination kept away from the kernel zeros.
pub fn random_quadruple(rng: &mut impl Rng, kernel: &SigmaKernel, min_sep: f64) -> [Complex64; 4] {
    loop {
        let [z, a, b, c] = std::array::from_fn(|_| sample_point(rng, kernel));
        let args = [
            z + a,
            z - a,
            b + c,
            b - c,
            z + b,
            z - b,
            a + c,
            a - c,
            z + c,
            z - c,
            b + a,
            b - a,
        ];
        if args.iter().all(|&w| well_separated(kernel, w, min_sep)) {
            return [z, a, b, c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_instances_repeat() {
        let k = SigmaKernel::Rational;
        let a = random_problem(&mut seeded(7), &k, 5, false, DEFAULT_SEPARATION).unwrap();
        let b = random_problem(&mut seeded(7), &k, 5, false, DEFAULT_SEPARATION).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn instances_respect_separation() {
        let mut rng = seeded(1);
        for (_, kernel) in kernel_grid(&mut rng).unwrap() {
            let p = random_problem(&mut rng, &kernel, 8, false, DEFAULT_SEPARATION).unwrap();
            let values = controlled_values(p.q(), p.r(), p.lambda().finite());
            assert!(values
                .iter()
                .all(|&z| kernel.nearest_zero_distance(z) >= DEFAULT_SEPARATION));
            let chain = chain_values(p.q(), p.r(), p.lambda().finite().unwrap());
            assert!(chain
                .iter()
                .all(|&z| within_extent(&kernel, z, CHAIN_EXTENT)));
            p.check_invariants().unwrap();
        }
    }

    #[test]
    fn region_coordinates_invert_the_edges() {
        let k = elliptic_from_nome(0.5, 2.0).unwrap();
        let (e1, e2) = sampling_region(&k);
        let (s, t) = region_coordinates(&k, 0.3 * e1 - 0.7 * e2);
        assert!((s - 0.3).abs() < 1e-14 && (t + 0.7).abs() < 1e-14);
    }

    #[test]
    fn infinity_only_for_rational() {
        let trig = SigmaKernel::trigonometric(Complex64::new(1.0, 0.0)).unwrap();
        assert!(random_problem(&mut seeded(0), &trig, 2, true, 0.05).is_err());
        let p = random_problem(&mut seeded(0), &SigmaKernel::Rational, 2, true, 0.05).unwrap();
        assert_eq!(p.lambda(), Lambda::AtInfinity);
    }

    #[test]
    fn grid_nomes() {
        let grid = kernel_grid(&mut seeded(3)).unwrap();
        let nomes: Vec<f64> = grid
            .iter()
            .filter_map(|(_, k)| k.lattice().map(|p| p.nome().norm()))
            .collect();
        assert_eq!(nomes.len(), 3);
        for (got, (want, _)) in nomes.iter().zip(ELLIPTIC_GRID) {
            assert!((got - want).abs() < 1e-14);
        }
    }
}
