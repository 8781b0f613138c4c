//! Closed-form Gauss decomposition `C = U·D·L` of the Cauchy-like matrix.
//!
//! Write `C_k(μ)` for the Cauchy-like matrix built from the first `k` points
//! with spectral parameter `μ`. Then
//!
//! ```text
//! U^{ij} = C_j^{ij}(λ_j)   (i ≤ j)
//! L^{ij} = C_i^{ij}(λ_i)   (i ≥ j)
//! D^{ii} = 1 / C_i^{ii}(λ_i),   C_i^{ii}(λ_i) = σ(λ_{i−1}) / (σ(λ_i) σ(q_i − r_i))
//! ```
//!
//! so that `det C = σ(λ_0) / (σ(λ) Π σ(q_k − r_k))`.
//!
//! The entries of the nested matrices are never materialized: the row
//! prefactor of `C_j^{ij}` over the prefix `i < k ≤ j` is a running product
//! along row `i`, and likewise down each column for `L`, giving `O(N²)`
//! kernel evaluations in total.

use num_complex::Complex64;

use crate::error::{DifferencePair, Error, Result};
use crate::matrix::{DenseMatrix, TriangularFactor, TriangularShape};
use crate::matrix_builder::{
    build_cauchy_like, lambda_sequence, left_prefactors, reversal_relabel, right_prefactors,
    CauchyProblem, Lambda, LambdaChain,
};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Peeling,
}

/// The order in which the three factors multiply back to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorOrder {
    /// `U · D · L`
    Udl,
    /// `L · D · U`
    Ldu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub upper: TriangularFactor,
    pub diagonal: TriangularFactor,
    pub lower: TriangularFactor,
    pub order: FactorOrder,
    pub method: Method,
    /// `None` at `λ = ∞`.
    pub lambda_seq: Option<LambdaChain>,
    /// Filled by [`crate::oracle::reconstruct_and_report`].
    pub reconstruction_residual: Option<f64>,
    /// Peeling only: largest relative deviation between the Schur complement
    /// of `C_m(λ_m)` and the freshly built `C_{m−1}(λ_{m−1})`.
    pub peeling_defect: Option<f64>,
    /// LDU only: `‖J·C_rev·J − C‖_F / ‖C‖_F`. Recorded, not asserted; the
    /// prefactors are not reversal symmetric.
    pub ldu_target_deviation: Option<f64>,
}

impl DecompositionResult {
    pub fn n(&self) -> usize {
        self.diagonal.n()
    }

    /// Multiplies the factors in their order, skipping structural zeros.
    pub fn product(&self) -> DenseMatrix {
        let n = self.n();
        let (u, d, l) = (&self.upper, &self.diagonal, &self.lower);
        DenseMatrix::from_fn(n, n, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            match self.order {
                FactorOrder::Udl => {
                    for k in i.max(j)..n {
                        acc += u.get(i, k) * d.get(k, k) * l.get(k, j);
                    }
                }
                FactorOrder::Ldu => {
                    for k in 0..=i.min(j) {
                        acc += l.get(i, k) * d.get(k, k) * u.get(k, j);
                    }
                }
            }
            acc
        })
    }

    pub fn determinant(&self) -> Complex64 {
        (0..self.n())
            .map(|k| self.upper.get(k, k) * self.diagonal.get(k, k) * self.lower.get(k, k))
            .product()
    }

    /// Determinant of the trailing `m × m` principal block (UDL) or of the
    /// leading block (LDU), read off the diagonal.
    pub fn corner_minor(&self, m: usize) -> Complex64 {
        let n = self.n();
        assert!(m <= n, "minor size {m} exceeds {n}");
        let range = match self.order {
            FactorOrder::Udl => n - m..n,
            FactorOrder::Ldu => 0..m,
        };
        range.map(|k| self.upper.get(k, k)).product()
    }
}

/// `1/z` with a single real division.
#[inline]
fn recip(z: Complex64) -> Complex64 {
    let s = 1.0 / z.norm_sqr();
    Complex64::new(z.re * s, -z.im * s)
}

/// Kernel values `σ(λ_k)` for the whole chain, each checked against the
/// zero set. `None` at `λ = ∞`.
fn checked_chain(problem: &CauchyProblem) -> Result<Option<(LambdaChain, Vec<Complex64>)>> {
    if problem.lambda() == Lambda::AtInfinity {
        return Ok(None);
    }
    let chain = lambda_sequence(problem)?;
    let sigmas = (0..=problem.n())
        .map(|k| problem.sigma_chain(k, chain.get(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some((chain, sigmas)))
}

pub fn decompose_closed_form(problem: &CauchyProblem) -> Result<DecompositionResult> {
    let n = problem.n();
    let (q, r) = (problem.q(), problem.r());
    let (kernel, opts) = (problem.kernel(), problem.opts());
    let chain = checked_chain(problem)?;
    let inv_chain: Option<Vec<Complex64>> = chain
        .as_ref()
        .map(|(_, sig)| sig.iter().map(|s| 1.0 / s).collect());

    // Row buffers of kernel values: σ(q_i − r_j), the divided-by difference,
    // and the numerator σ(q_i − r_j + λ_k)/σ(λ_k), which is the core factor
    // times σ(q_i − r_j). The last factor of each running prefactor,
    // σ(q_i − r_j)/σ(·), cancels that σ(q_i − r_j), so every entry costs one
    // division.
    let mut qr = Vec::with_capacity(n);
    let mut den = Vec::with_capacity(n);
    let mut num = Vec::with_capacity(n);
    let numerators = |num: &mut Vec<Complex64>,
                      i: usize,
                      js: std::ops::Range<usize>,
                      k: &dyn Fn(usize) -> usize|
     -> Result<()> {
        num.clear();
        match (&chain, &inv_chain) {
            (Some((lam, _)), Some(inv)) => {
                num.extend(js.clone().map(|j| q[i] - r[j] + lam.get(k(j))));
                kernel.sigma_in_place(num, opts)?;
                for (v, j) in num.iter_mut().zip(js) {
                    *v *= inv[k(j)];
                }
            }
            _ => num.extend(js.map(|_| ONE)),
        }
        Ok(())
    };

    // U^{ij} = C_j^{ij}(λ_j): row prefactor over i < k ≤ j, no column prefactor.
    let mut upper = Vec::with_capacity(n * (n + 1) / 2);
    let mut diagonal = Vec::with_capacity(n);
    let mut pivots = Vec::with_capacity(n);
    for i in 0..n {
        qr.clear();
        qr.extend((i..n).map(|j| q[i] - r[j]));
        problem.sigma_denominators(&mut qr, |t| DifferencePair::QMinusR { i, j: i + t })?;
        den.clear();
        den.extend((i + 1..n).map(|j| q[i] - q[j]));
        problem.sigma_denominators(&mut den, |t| DifferencePair::QMinusQ { i, k: i + 1 + t })?;
        numerators(&mut num, i, i..n, &|j| j + 1)?;

        let d = num[0] / qr[0];
        upper.push(d);
        pivots.push(d);
        diagonal.push(1.0 / d);
        let mut row = ONE;
        for t in 1..n - i {
            let inv_den = recip(den[t - 1]);
            upper.push(row * num[t] * inv_den);
            row *= qr[t] * inv_den;
        }
    }

    // L^{ij} = C_i^{ij}(λ_i): column prefactor over j < l ≤ i, no row prefactor.
    let mut lower = Vec::with_capacity(n * (n + 1) / 2);
    let mut col = vec![ONE; n];
    for i in 0..n {
        qr.clear();
        qr.extend((0..i).map(|j| q[i] - r[j]));
        problem.sigma_denominators(&mut qr, |j| DifferencePair::QMinusR { i, j })?;
        den.clear();
        den.extend((0..i).map(|j| r[i] - r[j]));
        problem.sigma_denominators(&mut den, |j| DifferencePair::RMinusR { l: i, j })?;
        numerators(&mut num, i, 0..i, &|_| i + 1)?;

        for j in 0..i {
            let inv_den = recip(den[j]);
            lower.push(col[j] * num[j] * inv_den);
            col[j] *= qr[j] * inv_den;
        }
        lower.push(pivots[i]);
    }

    let upper = TriangularFactor::from_packed(TriangularShape::Upper, n, upper)?;
    let lower = TriangularFactor::from_packed(TriangularShape::Lower, n, lower)?;
    let diagonal = TriangularFactor::from_packed(TriangularShape::Diagonal, n, diagonal)?;

    let result = DecompositionResult {
        upper,
        diagonal,
        lower,
        order: FactorOrder::Udl,
        method: Method::ClosedForm,
        lambda_seq: chain.map(|(c, _)| c),
        reconstruction_residual: None,
        peeling_defect: None,
        ldu_target_deviation: None,
    };
    check_finite(&result)?;
    Ok(result)
}

/// Recursive one-step peeling
///
/// ```text
/// C_m(λ_m) = [I  c; 0  d] · diag(C_{m−1}(λ_{m−1}), 1/d) · [I  0; γ  d]
/// ```
///
/// with `c`, `γ`, `d` the last column, last row and corner of `C_m(λ_m)`.
/// Each level is built directly from the prefix problem, so this path shares
/// no code with [`decompose_closed_form`] beyond the kernel. Costs `O(N³)`.
pub fn decompose_peeling(problem: &CauchyProblem) -> Result<DecompositionResult> {
    let n = problem.n();
    let chain = checked_chain(problem)?.map(|(c, _)| c);

    let mut upper = TriangularFactor::zeros(TriangularShape::Upper, n);
    let mut lower = TriangularFactor::zeros(TriangularShape::Lower, n);
    let mut diagonal = TriangularFactor::zeros(TriangularShape::Diagonal, n);
    let mut predicted: Option<DenseMatrix> = None;
    let mut defect: f64 = 0.0;

    for m in (1..=n).rev() {
        let lambda = match &chain {
            Some(c) => Lambda::Finite(c.get(m)),
            None => Lambda::AtInfinity,
        };
        let block = build_cauchy_like(&problem.prefix(m, lambda))?;
        if let Some(schur) = predicted.take() {
            defect = defect.max(schur.relative_distance(&block)?);
        }

        let last = m - 1;
        let d = block[(last, last)];
        for i in 0..last {
            upper.set(i, last, block[(i, last)]);
            lower.set(last, i, block[(last, i)]);
        }
        upper.set(last, last, d);
        lower.set(last, last, d);
        diagonal.set(last, last, 1.0 / d);

        if last > 0 {
            predicted = Some(DenseMatrix::from_fn(last, last, |i, j| {
                block[(i, j)] - block[(i, last)] * block[(last, j)] / d
            }));
        }
    }

    let result = DecompositionResult {
        upper,
        diagonal,
        lower,
        order: FactorOrder::Udl,
        method: Method::Peeling,
        lambda_seq: chain,
        reconstruction_residual: None,
        peeling_defect: Some(defect),
        ldu_target_deviation: None,
    };
    check_finite(&result)?;
    Ok(result)
}

/// The matrix the LDU factors reproduce: `J · C_rev · J`, with `C_rev` built
/// from the reversed point sets.
pub fn ldu_target(problem: &CauchyProblem) -> Result<DenseMatrix> {
    Ok(build_cauchy_like(&reversal_relabel(problem))?.reversal_conjugate())
}

/// Lower-diagonal-upper variant: decompose the reversed problem, then
/// conjugate each factor by the reversal permutation. The λ chain is the
/// reversed problem's own.
pub fn decompose_ldu(problem: &CauchyProblem) -> Result<DecompositionResult> {
    let reversed = reversal_relabel(problem);
    let udl = decompose_closed_form(&reversed)?;

    let deviation = match (ldu_target(problem), build_cauchy_like(problem)) {
        (Ok(target), Ok(original)) => target.relative_distance(&original).ok(),
        _ => None,
    };

    Ok(DecompositionResult {
        upper: udl.lower.reversal_conjugate(),
        diagonal: udl.diagonal.reversal_conjugate(),
        lower: udl.upper.reversal_conjugate(),
        order: FactorOrder::Ldu,
        method: Method::ClosedForm,
        lambda_seq: udl.lambda_seq,
        reconstruction_residual: None,
        peeling_defect: None,
        ldu_target_deviation: deviation,
    })
}

/// Both closed forms of the determinant: the telescoped
/// `σ(λ_0)/(σ(λ) Π σ(q_k − r_k))` and the product of diagonal entries
/// `Π σ(λ_{k−1})/(σ(λ_k) σ(q_k − r_k))`.
pub fn determinant_forms(problem: &CauchyProblem) -> Result<(Complex64, Complex64)> {
    problem.check_invariants()?;
    let n = problem.n();
    let (q, r) = (problem.q(), problem.r());
    let diag_sigma = (0..n)
        .map(|k| problem.sigma_denominator(q[k] - r[k], DifferencePair::QMinusR { i: k, j: k }))
        .collect::<Result<Vec<_>>>()?;

    match checked_chain(problem)? {
        None => {
            let v = 1.0 / diag_sigma.iter().product::<Complex64>();
            Ok((v, v))
        }
        Some((_, sig)) => {
            let telescoped = sig[0] / (sig[n] * diag_sigma.iter().product::<Complex64>());
            let diagonal_product = (1..=n)
                .map(|k| sig[k - 1] / (sig[k] * diag_sigma[k - 1]))
                .product();
            Ok((telescoped, diagonal_product))
        }
    }
}

pub fn determinant_closed_form(problem: &CauchyProblem) -> Result<Complex64> {
    let (telescoped, diagonal_product) = determinant_forms(problem)?;
    debug_assert!(
        (telescoped - diagonal_product).norm() <= 1e-12 * telescoped.norm().max(1e-300),
        "telescoped determinant {telescoped} disagrees with diagonal product {diagonal_product}"
    );
    Ok(telescoped)
}

fn check_index_sets(n: usize, rows: &[usize], cols: &[usize]) -> Result<()> {
    if rows.is_empty() || rows.len() != cols.len() {
        return Err(Error::IndexSet(format!(
            "row and column sets must be nonempty and of equal size, got {} and {}",
            rows.len(),
            cols.len()
        )));
    }
    for (name, set) in [("row", rows), ("column", cols)] {
        for (a, &i) in set.iter().enumerate() {
            if i >= n {
                return Err(Error::IndexSet(format!(
                    "{name} index {} out of range 1..={n}",
                    i + 1
                )));
            }
            if set[..a].contains(&i) {
                return Err(Error::IndexSet(format!("{name} index {} repeated", i + 1)));
            }
        }
    }
    Ok(())
}

/// Determinant of the submatrix of the full Cauchy-like matrix with the
/// given rows and columns (0-based, in the given order).
///
/// The prefactors are row and column scalings, so the minor is the bare
/// kernel minor
///
/// ```text
/// σ(λ + Σ_a (q_{I_a} − r_{J_a}))/σ(λ) · Π_{a<b} σ(q_{I_a} − q_{I_b}) σ(r_{J_b} − r_{J_a}) / Π_{a,b} σ(q_{I_a} − r_{J_b})
/// ```
///
/// times the selected prefactors. Singularities of the sub-problem's own
/// chain are reported with its indices: `k = 0` for the shifted argument and
/// `k = |I|` for `λ`.
pub fn minor_frobenius(
    problem: &CauchyProblem,
    rows: &[usize],
    cols: &[usize],
) -> Result<Complex64> {
    let n = problem.n();
    check_index_sets(n, rows, cols)?;
    let left = left_prefactors(problem)?;
    let right = right_prefactors(problem)?;
    let (q, r) = (problem.q(), problem.r());
    let m = rows.len();

    let mut value = ONE;
    for a in 0..m {
        for b in 0..m {
            let (i, j) = (rows[a], cols[b]);
            value /= problem.sigma_denominator(q[i] - r[j], DifferencePair::QMinusR { i, j })?;
        }
        for b in a + 1..m {
            value *=
                problem.sigma(q[rows[a]] - q[rows[b]])? * problem.sigma(r[cols[b]] - r[cols[a]])?;
        }
        value *= left[rows[a]] * right[cols[a]];
    }

    if let Lambda::Finite(lambda) = problem.lambda() {
        let shift = rows
            .iter()
            .zip(cols)
            .map(|(&i, &j)| q[i] - r[j])
            .sum::<Complex64>();
        let shifted = lambda + shift;
        let distance = problem.kernel().nearest_zero_distance(shifted);
        if !(distance > problem.opts().singularity_margin) {
            return Err(Error::LambdaChainSingular {
                k: 0,
                value: shifted,
                distance,
            });
        }
        value *= problem.sigma(shifted)? / problem.sigma_chain(m, lambda)?;
    }
    if !value.is_finite() {
        return Err(Error::Range(format!("minor is not finite: {value}")));
    }
    Ok(value)
}

/// The classical Cauchy determinant
/// `Π_{i<j} (q_i − q_j)(r_j − r_i) / Π_{i,j} (q_i − r_j)`.
pub fn cauchy_determinant(q: &[Complex64], r: &[Complex64]) -> Result<Complex64> {
    if q.len() != r.len() || q.is_empty() {
        return Err(Error::InvalidArgument(
            "cauchy determinant: point sets must be nonempty and of equal size".into(),
        ));
    }
    let n = q.len();
    let mut value = ONE;
    for i in 0..n {
        for j in 0..n {
            value /= q[i] - r[j];
        }
        for j in i + 1..n {
            value *= (q[i] - q[j]) * (r[j] - r[i]);
        }
    }
    if !value.is_finite() {
        return Err(Error::Range("cauchy determinant is not finite".into()));
    }
    Ok(value)
}

/// Largest `|a − b| / max(|a|, |b|)` over all entries of the three factors.
/// Entries that are zero in both count as equal.
pub fn max_factor_difference(a: &DecompositionResult, b: &DecompositionResult) -> Result<f64> {
    if a.n() != b.n() || a.order != b.order {
        return Err(Error::InvalidArgument(
            "factor comparison needs decompositions of equal size and order".into(),
        ));
    }
    let pairs = [
        (&a.upper, &b.upper),
        (&a.diagonal, &b.diagonal),
        (&a.lower, &b.lower),
    ];
    let mut worst: f64 = 0.0;
    for (x, y) in pairs {
        for (u, v) in x.packed().iter().zip(y.packed()) {
            let scale = u.norm().max(v.norm());
            if scale > 0.0 {
                worst = worst.max((u - v).norm() / scale);
            }
        }
    }
    Ok(worst)
}

fn check_finite(result: &DecompositionResult) -> Result<()> {
    if result.upper.is_finite() && result.lower.is_finite() && result.diagonal.is_finite() {
        Ok(())
    } else {
        Err(Error::Range(
            "decomposition produced non-finite factors".into(),
        ))
    }
}
