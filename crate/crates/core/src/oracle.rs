//! Brute-force ground truth: generic elimination, determinants, residual
//! norms and the slow lattice-product sigma. Nothing here uses the
//! structure of the Cauchy-like matrix.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauss_decomposition::DecompositionResult;
use crate::matrix::{DenseMatrix, TriangularFactor, TriangularShape};
use crate::special_functions::LatticeParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Unpivoted factors `A = L·U` with `L` unit lower triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct LuFactors {
    pub lower: TriangularFactor,
    pub upper: TriangularFactor,
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.upper.n()
    }

    pub fn determinant(&self) -> Complex64 {
        self.upper.diagonal().product()
    }

    /// `max |U| / max |A|`.
    pub fn growth(&self, original: &DenseMatrix) -> f64 {
        let umax = self
            .upper
            .packed()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        umax / original.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] = y[i] - self.lower.get(i, k) * y[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] = y[i] - self.upper.get(i, k) * y[k];
            }
            y[i] /= self.upper.get(i, i);
        }
        y
    }

    /// Solves `Aᴴ x = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        let mut y = b.to_vec();
        // Uᴴ is lower triangular
        for i in 0..n {
            for k in 0..i {
                y[i] = y[i] - self.upper.get(k, i).conj() * y[k];
            }
            y[i] /= self.upper.get(i, i).conj();
        }
        // Lᴴ is unit upper triangular
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] = y[i] - self.lower.get(k, i).conj() * y[k];
            }
        }
        y
    }
}

/// Unpivoted Doolittle elimination. Unpivoted so that the factors stay
/// comparable with a Gauss decomposition.
///
/// Breakdown is reported when a pivot is zero, non-finite, or below
/// `n·ε` times the magnitude of the terms it was accumulated from.
pub fn lu_doolittle(matrix: &DenseMatrix) -> Result<LuFactors> {
    if !matrix.is_square() {
        return Err(Error::InvalidArgument(format!(
            "lu: matrix is {}x{}, not square",
            matrix.n_rows(),
            matrix.n_cols()
        )));
    }
    let n = matrix.n_rows();
    let mut a = matrix.entries().to_vec();
    // accumulated magnitude feeding each diagonal entry
    let mut diag_scale: Vec<f64> = (0..n).map(|k| a[k * n + k].norm()).collect();

    for k in 0..n {
        let pivot = a[k * n + k];
        let tol = n as f64 * f64::EPSILON * diag_scale[k];
        if !pivot.is_finite() || pivot == ZERO || pivot.norm() <= tol {
            return Err(Error::Breakdown { pivot: k });
        }
        let (head, tail) = a.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n..];
        for i in k + 1..n {
            let row = &mut tail[(i - k - 1) * n..(i - k) * n];
            let l = row[k] / pivot;
            row[k] = l;
            for j in k + 1..n {
                row[j] -= l * pivot_row[j];
            }
            diag_scale[i] += (l * pivot_row[i]).norm();
        }
    }

    let mut lower = TriangularFactor::zeros(TriangularShape::Lower, n);
    let mut upper = TriangularFactor::zeros(TriangularShape::Upper, n);
    for i in 0..n {
        for j in 0..n {
            if j < i {
                lower.set(i, j, a[i * n + j]);
            } else {
                upper.set(i, j, a[i * n + j]);
            }
        }
        lower.set(i, i, ONE);
    }
    Ok(LuFactors { lower, upper })
}

/// Determinant and growth factor from elimination with partial pivoting.
pub fn det_partial_pivot(matrix: &DenseMatrix) -> Result<(Complex64, f64)> {
    if !matrix.is_square() {
        return Err(Error::InvalidArgument("det: matrix is not square".into()));
    }
    let n = matrix.n_rows();
    let mut a = matrix.entries().to_vec();
    let mut det = ONE;
    let mut umax: f64 = 0.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| a[x * n + k].norm().total_cmp(&a[y * n + k].norm()))
            .unwrap_or(k);
        if a[p * n + k] == ZERO {
            return Ok((ZERO, umax / matrix.max_abs().max(f64::MIN_POSITIVE)));
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        for j in k..n {
            umax = umax.max(a[k * n + j].norm());
        }
        for i in k + 1..n {
            let l = a[i * n + k] / pivot;
            for j in k + 1..n {
                let u = a[k * n + j];
                a[i * n + j] -= l * u;
            }
        }
    }
    Ok((det, umax / matrix.max_abs().max(f64::MIN_POSITIVE)))
}

/// Growth factor above which the unpivoted determinant is cross-checked
/// against partial pivoting.
const GROWTH_LIMIT: f64 = 1e3;

/// Determinant as the diagonal product of [`lu_doolittle`]. When the
/// unpivoted elimination breaks down or shows large growth, the value from
/// partial pivoting is used if its growth is smaller.
pub fn det_numeric(matrix: &DenseMatrix) -> Result<Complex64> {
    match lu_doolittle(matrix) {
        Ok(lu) => {
            let growth = lu.growth(matrix);
            if growth <= GROWTH_LIMIT {
                return Ok(lu.determinant());
            }
            let (pivoted, pivoted_growth) = det_partial_pivot(matrix)?;
            Ok(if pivoted_growth < growth {
                pivoted
            } else {
                lu.determinant()
            })
        }
        Err(Error::Breakdown { pivot }) => match det_partial_pivot(matrix)? {
            (det, _) if det != ZERO => Ok(det),
            _ => Err(Error::Breakdown { pivot }),
        },
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub frobenius_relative: f64,
    /// `max |Δ_ij| / max |C_ij|`
    pub max_entry_relative: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub determinant_relative: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_estimate: Option<f64>,
}

/// Multiplies the factors back together and compares with `matrix`. Fills
/// `result.reconstruction_residual`.
pub fn reconstruct_and_report(
    result: &mut DecompositionResult,
    matrix: &DenseMatrix,
) -> Result<ResidualReport> {
    if !matrix.is_square() || matrix.n_rows() != result.n() {
        return Err(Error::InvalidArgument(format!(
            "reconstruct: factors are {n}x{n} but matrix is {}x{}",
            matrix.n_rows(),
            matrix.n_cols(),
            n = result.n()
        )));
    }
    let product = result.product();
    let diff = product.sub(matrix)?;
    let frobenius_relative = product.relative_distance(matrix)?;
    let max_entry_relative = diff.max_abs() / matrix.max_abs().max(f64::MIN_POSITIVE);

    let lu = lu_doolittle(matrix).ok();
    let determinant_relative = det_numeric(matrix)
        .ok()
        .map(|det| (result.determinant() - det).norm() / det.norm().max(1e-300));
    let condition_estimate = lu.as_ref().map(|lu| condition_estimate(matrix, lu));

    result.reconstruction_residual = Some(frobenius_relative);
    Ok(ResidualReport {
        frobenius_relative,
        max_entry_relative,
        determinant_relative,
        condition_estimate,
    })
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

fn mul_vec(a: &DenseMatrix, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.n_rows())
        .map(|i| a.row(i).iter().zip(x).map(|(aij, xj)| aij * xj).sum())
        .collect()
}

fn mul_adjoint_vec(a: &DenseMatrix, x: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.n_cols()];
    for (i, xi) in x.iter().enumerate() {
        for (o, aij) in out.iter_mut().zip(a.row(i)) {
            *o += aij.conj() * xi;
        }
    }
    out
}

/// Rough 2-norm condition number from power iteration on `AᴴA` and on its
/// inverse applied through the LU factors. Approximate; reported only.
pub fn condition_estimate(matrix: &DenseMatrix, lu: &LuFactors) -> f64 {
    const ITERATIONS: usize = 12;
    let n = matrix.n_rows();
    let start: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0, 0.1 * i as f64 / n.max(1) as f64))
        .collect();

    let mut x = start.clone();
    normalize(&mut x);
    let mut big = 0.0;
    for _ in 0..ITERATIONS {
        let mut y = mul_adjoint_vec(matrix, &mul_vec(matrix, &x));
        big = normalize(&mut y);
        x = y;
    }

    let mut x = start;
    normalize(&mut x);
    let mut small_inv = 0.0;
    for _ in 0..ITERATIONS {
        let mut y = lu.solve(&lu.solve_adjoint(&x));
        small_inv = normalize(&mut y);
        x = y;
    }
    (big * small_inv).sqrt()
}

/// Sigma from the truncated Weierstrass product
/// `z Π' (1 − z/w) exp(z/w + z²/(2w²))` over `w = 2mω₁ + 2nω₃`,
/// `|m|, |n| ≤ cutoff`. The truncation error decays only like
/// `|z|⁴ / cutoff²`.
pub fn sigma_lattice_product(
    params: &LatticeParams,
    z: Complex64,
    cutoff: usize,
) -> Result<Complex64> {
    if cutoff < 10 {
        return Err(Error::InvalidArgument(format!(
            "lattice product: cutoff must be at least 10, got {cutoff}"
        )));
    }
    let c = cutoff as i64;
    let mut log_sum = ZERO;
    for m in -c..=c {
        for n in -c..=c {
            if m == 0 && n == 0 {
                continue;
            }
            let x = z / params.lattice_point(m as f64, n as f64);
            log_sum += (1.0 - x).ln() + x + x * x / 2.0;
        }
    }
    let value = z * log_sum.exp();
    if !value.is_finite() {
        return Err(Error::Range(format!(
            "lattice product at {z} is not finite"
        )));
    }
    Ok(value)
}

/// Double-double real: unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd {
            hi: s,
            lo: b - (s - a),
        }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let u = Dd::quick_two_sum(s.hi, s.lo + t.hi);
        Dd::quick_two_sum(u.hi, u.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    fn mul(self, o: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, o.hi);
        Dd::quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from_f64(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from_f64(q2)));
        let q3 = r.hi / o.hi;
        let q = Dd::quick_two_sum(q1, q2);
        q.add(Dd::from_f64(q3))
    }
}

#[derive(Debug, Clone, Copy)]
struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    const ONE: Cdd = Cdd {
        re: Dd::ONE,
        im: Dd::ZERO,
    };

    /// `a − b` with no rounding in the leading double-double term.
    fn exact_difference(a: Complex64, b: Complex64) -> Cdd {
        Cdd {
            re: Dd::two_sum(a.re, -b.re),
            im: Dd::two_sum(a.im, -b.im),
        }
    }

    fn sub(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.sub(o.re),
            im: self.im.sub(o.im),
        }
    }

    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    fn div(self, o: Cdd) -> Cdd {
        let den = o.re.mul(o.re).add(o.im.mul(o.im));
        Cdd {
            re: self.re.mul(o.re).add(self.im.mul(o.im)).div(den),
            im: self.im.mul(o.re).sub(self.re.mul(o.im)).div(den),
        }
    }

    fn neg(self) -> Cdd {
        Cdd {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    fn magnitude_sq(self) -> f64 {
        self.re.hi * self.re.hi + self.im.hi * self.im.hi
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }
}

/// Determinant of the classical Cauchy matrix `1/(q_i − r_j)` with every
/// entry formed and eliminated in double-double arithmetic (about 32
/// significant digits), with partial pivoting.
pub fn cauchy_det_extended(q: &[Complex64], r: &[Complex64]) -> Result<Complex64> {
    let n = q.len();
    if r.len() != n {
        return Err(Error::InvalidArgument(format!(
            "extended Cauchy determinant: {} q points but {} r points",
            n,
            r.len()
        )));
    }
    let mut a = Vec::with_capacity(n * n);
    for &qi in q {
        for &rj in r {
            let d = Cdd::exact_difference(qi, rj);
            if d.magnitude_sq() == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "extended Cauchy determinant: q point {qi} coincides with an r point"
                )));
            }
            a.push(Cdd::ONE.div(d));
        }
    }
    let mut det = Cdd::ONE;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| {
                a[x * n + k]
                    .magnitude_sq()
                    .total_cmp(&a[y * n + k].magnitude_sq())
            })
            .unwrap_or(k);
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = det.neg();
        }
        let pivot = a[k * n + k];
        if pivot.magnitude_sq() == 0.0 {
            return Ok(ZERO);
        }
        det = det.mul(pivot);
        for i in k + 1..n {
            let m = a[i * n + k].div(pivot);
            for j in k + 1..n {
                a[i * n + j] = a[i * n + j].sub(m.mul(a[k * n + j]));
            }
        }
    }
    let value = det.to_complex();
    if !value.is_finite() {
        return Err(Error::Range(
            "extended Cauchy determinant is not finite".into(),
        ));
    }
    Ok(value)
}
