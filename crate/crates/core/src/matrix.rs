//! Dense row-major complex matrices and packed triangular factors.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: vec![ZERO; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_row_major(n_rows: usize, n_cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n_rows * n_cols {
            return Err(Error::InvalidArgument(format!(
                "matrix: expected {} entries for {n_rows}x{n_cols}, got {}",
                n_rows * n_cols,
                entries.len()
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries,
        })
    }

    pub fn from_fn(
        n_rows: usize,
        n_cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                entries.push(f(i, j));
            }
        }
        Self {
            n_rows,
            n_cols,
            entries,
        }
    }

    pub fn try_from_fn(
        n_rows: usize,
        n_cols: usize,
        mut f: impl FnMut(usize, usize) -> Result<Complex64>,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                entries.push(f(i, j)?);
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_cols != rhs.n_rows {
            return Err(Error::InvalidArgument(format!(
                "matmul: {}x{} times {}x{}",
                self.n_rows, self.n_cols, rhs.n_rows, rhs.n_cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.n_rows, rhs.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.entries[i * rhs.n_cols..(i + 1) * rhs.n_cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if (self.n_rows, self.n_cols) != (rhs.n_rows, rhs.n_cols) {
            return Err(Error::InvalidArgument("sub: shape mismatch".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries,
        })
    }

    /// `‖self − reference‖_F / ‖reference‖_F`, falling back to the absolute
    /// norm when the reference is zero.
    pub fn relative_distance(&self, reference: &DenseMatrix) -> Result<f64> {
        let diff = self.sub(reference)?.frobenius_norm();
        let scale = reference.frobenius_norm();
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<DenseMatrix> {
        if rows.iter().any(|&i| i >= self.n_rows) || cols.iter().any(|&j| j >= self.n_cols) {
            return Err(Error::IndexSet("submatrix index out of range".into()));
        }
        Ok(DenseMatrix::from_fn(rows.len(), cols.len(), |a, b| {
            self[(rows[a], cols[b])]
        }))
    }

    /// `J · self · J` with `J` the reversal permutation.
    pub fn reversal_conjugate(&self) -> DenseMatrix {
        let (r, c) = (self.n_rows, self.n_cols);
        DenseMatrix::from_fn(r, c, |i, j| self[(r - 1 - i, c - 1 - j)])
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(
            i < self.n_rows && j < self.n_cols,
            "index ({i}, {j}) out of bounds"
        );
        &self.entries[i * self.n_cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(
            i < self.n_rows && j < self.n_cols,
            "index ({i}, {j}) out of bounds"
        );
        &mut self.entries[i * self.n_cols + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangularShape {
    Upper,
    Lower,
    Diagonal,
}

/// Square triangular or diagonal matrix storing only its structurally
/// nonzero part. Reads outside the structure return an exact zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularFactor {
    shape: TriangularShape,
    n: usize,
    packed: Vec<Complex64>,
}

impl TriangularFactor {
    pub fn zeros(shape: TriangularShape, n: usize) -> Self {
        let mut f = Self {
            shape,
            n,
            packed: Vec::new(),
        };
        f.packed = vec![ZERO; f.packed_len(n)];
        f
    }

    /// Takes ownership of packed storage in row order: row `i` of an upper
    /// factor holds columns `i..n`, row `i` of a lower factor columns `0..=i`.
    pub fn from_packed(shape: TriangularShape, n: usize, packed: Vec<Complex64>) -> Result<Self> {
        let expect = Self::zeros(shape, 0).packed_len(n);
        if packed.len() != expect {
            return Err(Error::InvalidArgument(format!(
                "packed {shape:?} factor of size {n} needs {expect} entries, got {}",
                packed.len()
            )));
        }
        Ok(Self { shape, n, packed })
    }

    fn packed_len(&self, n: usize) -> usize {
        match self.shape {
            TriangularShape::Diagonal => n,
            _ => n * (n + 1) / 2,
        }
    }

    pub fn shape(&self) -> TriangularShape {
        self.shape
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn packed(&self) -> &[Complex64] {
        &self.packed
    }

    pub fn in_structure(&self, i: usize, j: usize) -> bool {
        i < self.n
            && j < self.n
            && match self.shape {
                TriangularShape::Upper => i <= j,
                TriangularShape::Lower => i >= j,
                TriangularShape::Diagonal => i == j,
            }
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        match self.shape {
            // row i holds columns i..n
            TriangularShape::Upper => i * self.n - i * i.saturating_sub(1) / 2 - i + j,
            // row i holds columns 0..=i
            TriangularShape::Lower => i * (i + 1) / 2 + j,
            TriangularShape::Diagonal => i,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_structure(i, j) {
            self.packed[self.offset(i, j)]
        } else {
            ZERO
        }
    }

    /// Panics when `(i, j)` lies outside the structure.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(
            self.in_structure(i, j),
            "({i}, {j}) is outside the {:?} structure of size {}",
            self.shape,
            self.n
        );
        let k = self.offset(i, j);
        self.packed[k] = value;
    }

    pub fn diagonal(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.n).map(move |i| self.get(i, i))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// `J · self · J`; swaps upper and lower structure.
    pub fn reversal_conjugate(&self) -> TriangularFactor {
        let shape = match self.shape {
            TriangularShape::Upper => TriangularShape::Lower,
            TriangularShape::Lower => TriangularShape::Upper,
            TriangularShape::Diagonal => TriangularShape::Diagonal,
        };
        let n = self.n;
        let mut out = TriangularFactor::zeros(shape, n);
        for i in 0..n {
            for j in 0..n {
                if out.in_structure(i, j) {
                    out.set(i, j, self.get(n - 1 - i, n - 1 - j));
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.packed.iter().all(|z| z.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn packed_offsets_are_a_bijection() {
        for shape in [
            TriangularShape::Upper,
            TriangularShape::Lower,
            TriangularShape::Diagonal,
        ] {
            for n in 1..7 {
                let mut f = TriangularFactor::zeros(shape, n);
                let mut count = 0;
                for i in 0..n {
                    for j in 0..n {
                        if f.in_structure(i, j) {
                            count += 1;
                            f.set(i, j, c((i * n + j) as f64 + 1.0));
                        }
                    }
                }
                assert_eq!(count, f.packed().len());
                assert!(f.packed().iter().all(|z| z.re > 0.0), "{shape:?} n={n}");
                for i in 0..n {
                    for j in 0..n {
                        let expect = if f.in_structure(i, j) {
                            c((i * n + j) as f64 + 1.0)
                        } else {
                            ZERO
                        };
                        assert_eq!(f.get(i, j), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn from_packed_matches_set() {
        let n = 4;
        let mut by_set = TriangularFactor::zeros(TriangularShape::Lower, n);
        let mut packed = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                let v = c((10 * i + j) as f64);
                by_set.set(i, j, v);
                packed.push(v);
            }
        }
        let direct = TriangularFactor::from_packed(TriangularShape::Lower, n, packed).unwrap();
        assert_eq!(direct, by_set);
        assert!(TriangularFactor::from_packed(TriangularShape::Upper, 3, vec![ZERO; 5]).is_err());
    }

    #[test]
    #[should_panic(expected = "outside")]
    fn writing_outside_structure_panics() {
        let mut f = TriangularFactor::zeros(TriangularShape::Upper, 3);
        f.set(2, 0, c(1.0));
    }

    #[test]
    fn reversal_swaps_structure() {
        let mut u = TriangularFactor::zeros(TriangularShape::Upper, 3);
        u.set(0, 2, c(5.0));
        u.set(1, 1, c(2.0));
        let l = u.reversal_conjugate();
        assert_eq!(l.shape(), TriangularShape::Lower);
        assert_eq!(l.get(2, 0), c(5.0));
        assert_eq!(l.get(1, 1), c(2.0));
        assert_eq!(l.to_dense(), u.to_dense().reversal_conjugate());
    }

    #[test]
    fn matmul_and_distance() {
        let a = DenseMatrix::from_fn(2, 3, |i, j| c((i + j) as f64));
        let b = DenseMatrix::identity(3);
        assert_eq!(a.matmul(&b).unwrap(), a);
        assert!(b.matmul(&a).is_err());
        assert_eq!(a.relative_distance(&a).unwrap(), 0.0);
        let sub = a.submatrix(&[1], &[2, 0]).unwrap();
        assert_eq!(sub.entries(), &[c(3.0), c(1.0)]);
    }
}
