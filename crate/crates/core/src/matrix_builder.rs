//! Problem definition and construction of the rational Cauchy, bare
//! elliptic Cauchy and prefactored Cauchy-like matrices.
//!
//! For points `q, r ∈ ℂᴺ`, spectral parameter `λ` and kernel `σ`, the
//! Cauchy-like matrix has entries
//!
//! ```text
//! C^{ij}(λ) = Π_{k>i} σ(q_i−r_k)/σ(q_i−q_k) · σ(q_i−r_j+λ)/(σ(λ)σ(q_i−r_j)) · Π_{l>j} σ(q_l−r_j)/σ(r_l−r_j)
//! ```
//!
//! The middle factor alone is the bare kernel matrix. With the rational
//! kernel and `λ = ∞` it degenerates to the classical `1/(q_i − r_j)`.

use num_complex::Complex64;

use crate::error::{DifferencePair, Error, Result};
use crate::matrix::DenseMatrix;
use crate::special_functions::{EvalOptions, SigmaKernel};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The spectral parameter. `AtInfinity` is the symbolic rational limit, not a
/// large number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Finite(Complex64),
    AtInfinity,
}

impl Lambda {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Lambda::Finite(z) => Some(z),
            Lambda::AtInfinity => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CauchyProblem {
    q: Vec<Complex64>,
    r: Vec<Complex64>,
    lambda: Lambda,
    kernel: SigmaKernel,
    opts: EvalOptions,
}

impl CauchyProblem {
    /// Checks the structural invariants only. Singular denominators are
    /// reported by the operation that needs them, since the bare kernel and
    /// the Cauchy-like matrix have different precondition sets.
    pub fn new(
        q: Vec<Complex64>,
        r: Vec<Complex64>,
        lambda: Lambda,
        kernel: SigmaKernel,
        opts: EvalOptions,
    ) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidArgument(
                "problem: need at least one point".into(),
            ));
        }
        if q.len() != r.len() {
            return Err(Error::InvalidArgument(format!(
                "problem: q has {} points but r has {}",
                q.len(),
                r.len()
            )));
        }
        if !q.iter().chain(&r).all(|z| z.is_finite()) {
            return Err(Error::InvalidArgument(
                "problem: points must be finite".into(),
            ));
        }
        if let Lambda::Finite(l) = lambda {
            if !l.is_finite() {
                return Err(Error::InvalidArgument(
                    "problem: lambda must be finite".into(),
                ));
            }
        }
        kernel.validate()?;
        opts.validate()?;
        if lambda == Lambda::AtInfinity && !kernel.is_rational() {
            return Err(Error::InvalidArgument(format!(
                "problem: lambda = infinity is only defined for the rational kernel, got {}",
                kernel.name()
            )));
        }
        Ok(Self {
            q,
            r,
            lambda,
            kernel,
            opts,
        })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[Complex64] {
        &self.q
    }

    pub fn r(&self) -> &[Complex64] {
        &self.r
    }

    pub fn lambda(&self) -> Lambda {
        self.lambda
    }

    pub fn kernel(&self) -> &SigmaKernel {
        &self.kernel
    }

    pub fn opts(&self) -> &EvalOptions {
        &self.opts
    }

    /// The problem on the first `m` points with spectral parameter `lambda`.
    pub fn prefix(&self, m: usize, lambda: Lambda) -> CauchyProblem {
        assert!(m >= 1 && m <= self.n(), "prefix length {m} out of range");
        CauchyProblem {
            q: self.q[..m].to_vec(),
            r: self.r[..m].to_vec(),
            lambda,
            kernel: self.kernel.clone(),
            opts: self.opts,
        }
    }

    pub fn with_lambda(&self, lambda: Lambda) -> Result<CauchyProblem> {
        CauchyProblem::new(
            self.q.clone(),
            self.r.clone(),
            lambda,
            self.kernel.clone(),
            self.opts,
        )
    }

    pub fn sigma(&self, z: Complex64) -> Result<Complex64> {
        self.kernel.sigma(z, &self.opts)
    }

    /// Kernel value of a difference that will be divided by.
    pub(crate) fn sigma_denominator(
        &self,
        value: Complex64,
        pair: DifferencePair,
    ) -> Result<Complex64> {
        if !self
            .kernel
            .clears_zeros(value, self.opts.singularity_margin)
        {
            return Err(Error::SingularDifference {
                pair,
                value,
                distance: self.kernel.nearest_zero_distance(value),
            });
        }
        self.sigma(value)
    }

    /// [`Self::sigma_denominator`] over a batch, in place; `pair(t)` names
    /// the difference held in `values[t]`.
    pub(crate) fn sigma_denominators(
        &self,
        values: &mut [Complex64],
        pair: impl Fn(usize) -> DifferencePair,
    ) -> Result<()> {
        let margin = self.opts.singularity_margin;
        if let Some(t) = values
            .iter()
            .position(|&z| !self.kernel.clears_zeros(z, margin))
        {
            return Err(Error::SingularDifference {
                pair: pair(t),
                value: values[t],
                distance: self.kernel.nearest_zero_distance(values[t]),
            });
        }
        self.kernel.sigma_in_place(values, &self.opts)
    }

    /// Kernel value of `λ_k` when it will be divided by.
    pub(crate) fn sigma_chain(&self, k: usize, value: Complex64) -> Result<Complex64> {
        let distance = self.kernel.nearest_zero_distance(value);
        if !(distance > self.opts.singularity_margin) {
            return Err(Error::LambdaChainSingular { k, value, distance });
        }
        self.sigma(value)
    }

    /// Verifies every nonsingularity invariant: all three denominator
    /// classes and, for finite λ, the whole chain `λ_0 .. λ_N`.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                self.check_distance(self.q[i] - self.r[j], DifferencePair::QMinusR { i, j })?;
            }
            for k in i + 1..n {
                self.check_distance(self.q[i] - self.q[k], DifferencePair::QMinusQ { i, k })?;
                self.check_distance(
                    self.r[k] - self.r[i],
                    DifferencePair::RMinusR { l: k, j: i },
                )?;
            }
        }
        if self.lambda.finite().is_some() {
            let chain = lambda_sequence(self)?;
            for k in 0..=n {
                let value = chain.get(k);
                let distance = self.kernel.nearest_zero_distance(value);
                if !(distance > self.opts.singularity_margin) {
                    return Err(Error::LambdaChainSingular { k, value, distance });
                }
            }
        }
        Ok(())
    }

    fn check_distance(&self, value: Complex64, pair: DifferencePair) -> Result<()> {
        let distance = self.kernel.nearest_zero_distance(value);
        if !(distance > self.opts.singularity_margin) {
            return Err(Error::SingularDifference {
                pair,
                value,
                distance,
            });
        }
        Ok(())
    }
}

/// `λ_k` for `k = 0..=N`, with `λ_N = λ` and `λ_{k−1} = λ_k + q_k − r_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaChain {
    values: Vec<Complex64>,
}

impl LambdaChain {
    /// `λ_k` in the 1-based point numbering, `0 ≤ k ≤ N`.
    pub fn get(&self, k: usize) -> Complex64 {
        self.values[k]
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    /// `λ_0, λ_1, …, λ_N`.
    pub fn ascending(&self) -> &[Complex64] {
        &self.values
    }

    /// `λ_N, λ_{N−1}, …, λ_0`.
    pub fn descending(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.values.iter().rev().copied()
    }
}

pub fn lambda_sequence(problem: &CauchyProblem) -> Result<LambdaChain> {
    let lambda = problem.lambda.finite().ok_or_else(|| {
        Error::InvalidArgument("lambda sequence is undefined for lambda = infinity".into())
    })?;
    let n = problem.n();
    let mut values = vec![Complex64::new(0.0, 0.0); n + 1];
    values[n] = lambda;
    for k in (1..=n).rev() {
        values[k - 1] = values[k] + problem.q[k - 1] - problem.r[k - 1];
    }

    if cfg!(debug_assertions) {
        // closed-sum form, summed in a different order
        let mut scale = lambda.norm();
        let mut tail = Complex64::new(0.0, 0.0);
        for k in (1..=n).rev() {
            let d = problem.q[k - 1] - problem.r[k - 1];
            tail += d;
            scale += d.norm();
            let closed = lambda + tail;
            debug_assert!(
                (closed - values[k - 1]).norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE),
                "lambda chain recursion and closed sum disagree at k = {}",
                k - 1
            );
        }
    }
    Ok(LambdaChain { values })
}

/// Kernel values `σ(q_i − r_j)` for every pair, checked as denominators.
pub(crate) fn sigma_qr_table(problem: &CauchyProblem) -> Result<Vec<Complex64>> {
    let n = problem.n();
    let mut table = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let d = problem.q[i] - problem.r[j];
            table.push(problem.sigma_denominator(d, DifferencePair::QMinusR { i, j })?);
        }
    }
    Ok(table)
}

fn left_prefactors_from(problem: &CauchyProblem, sqr: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = problem.n();
    (0..n)
        .map(|i| {
            let mut p = ONE;
            for k in i + 1..n {
                let den = problem.sigma_denominator(
                    problem.q[i] - problem.q[k],
                    DifferencePair::QMinusQ { i, k },
                )?;
                p *= sqr[i * n + k] / den;
            }
            Ok(p)
        })
        .collect()
}

fn right_prefactors_from(problem: &CauchyProblem, sqr: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = problem.n();
    (0..n)
        .map(|j| {
            let mut p = ONE;
            for l in j + 1..n {
                let den = problem.sigma_denominator(
                    problem.r[l] - problem.r[j],
                    DifferencePair::RMinusR { l, j },
                )?;
                p *= sqr[l * n + j] / den;
            }
            Ok(p)
        })
        .collect()
}

/// Row scalings `Π_{k>i} σ(q_i − r_k)/σ(q_i − q_k)`.
pub fn left_prefactors(problem: &CauchyProblem) -> Result<Vec<Complex64>> {
    left_prefactors_from(problem, &sigma_qr_table(problem)?)
}

/// Column scalings `Π_{l>j} σ(q_l − r_j)/σ(r_l − r_j)`.
pub fn right_prefactors(problem: &CauchyProblem) -> Result<Vec<Complex64>> {
    right_prefactors_from(problem, &sigma_qr_table(problem)?)
}

/// Bare kernel entries given the `σ(q_i − r_j)` table.
fn kernel_matrix_from(problem: &CauchyProblem, sqr: &[Complex64]) -> Result<DenseMatrix> {
    let n = problem.n();
    match problem.lambda {
        Lambda::AtInfinity => Ok(DenseMatrix::from_fn(n, n, |i, j| 1.0 / sqr[i * n + j])),
        Lambda::Finite(lambda) => {
            let sigma_lambda = problem.sigma_chain(n, lambda)?;
            DenseMatrix::try_from_fn(n, n, |i, j| {
                let num = problem.sigma(problem.q[i] - problem.r[j] + lambda)?;
                Ok(num / (sigma_lambda * sqr[i * n + j]))
            })
        }
    }
}

/// The bare kernel matrix `σ(q_i − r_j + λ) / (σ(λ) σ(q_i − r_j))`, or
/// `1/(q_i − r_j)` at `λ = ∞`. Tolerates repeated `q` or `r` values.
pub fn build_frobenius_kernel(problem: &CauchyProblem) -> Result<DenseMatrix> {
    let sqr = sigma_qr_table(problem)?;
    kernel_matrix_from(problem, &sqr)
}

/// The prefactored Cauchy-like matrix.
pub fn build_cauchy_like(problem: &CauchyProblem) -> Result<DenseMatrix> {
    let n = problem.n();
    let sqr = sigma_qr_table(problem)?;
    let left = left_prefactors_from(problem, &sqr)?;
    let right = right_prefactors_from(problem, &sqr)?;
    let mut m = kernel_matrix_from(problem, &sqr)?;
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] *= left[i] * right[j];
        }
    }
    Ok(m)
}

/// Reverses the order of both point sets; λ is unchanged.
pub fn reversal_relabel(problem: &CauchyProblem) -> CauchyProblem {
    let mut out = problem.clone();
    out.q.reverse();
    out.r.reverse();
    out
}
