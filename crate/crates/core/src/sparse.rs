//! Compressed-sparse-row complex matrices, enough for operator algebra and
//! superoperator assembly.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex CSR matrix. Column indices are sorted within each row and there
/// are no duplicates; explicit zeros may be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: alloc::vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&alloc::vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    ///
    /// # Panics
    /// If an index is out of range.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, Complex64)]) -> Self {
        let mut counts = alloc::vec![0usize; rows + 1];
        for &(r, c, _) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
            counts[r + 1] += 1;
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols_buf = alloc::vec![0usize; triplets.len()];
        let mut vals_buf = alloc::vec![ZERO; triplets.len()];
        for &(r, c, v) in triplets {
            let slot = next[r];
            cols_buf[slot] = c;
            vals_buf[slot] = v;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..rows {
            order.clear();
            order.extend(counts[r]..counts[r + 1]);
            order.sort_by_key(|&k| cols_buf[k]);
            let mut last: Option<usize> = None;
            for &k in &order {
                if last == Some(cols_buf[k]) {
                    *values.last_mut().expect("entry pushed for this column") += vals_buf[k];
                } else {
                    col_idx.push(cols_buf[k]);
                    values.push(vals_buf[k]);
                    last = Some(cols_buf[k]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Column-major dense input, as used by [`crate::hilbert::DensityMatrix`].
    pub fn from_dense_col_major(rows: usize, cols: usize, data: &[Complex64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        let mut t = Vec::new();
        for c in 0..cols {
            for r in 0..rows {
                let v = data[r + c * rows];
                if v != ZERO {
                    t.push((r, c, v));
                }
            }
        }
        Self::from_triplets(rows, cols, &t)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.col_idx[lo..hi].binary_search(&c) {
            Ok(k) => self.values[lo + k],
            Err(_) => ZERO,
        }
    }

    /// Stored entries as `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        self.iter().collect()
    }

    pub fn map_values(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, &t)
    }

    pub fn conj(&self) -> Self {
        self.map_values(|v| v.conj())
    }

    pub fn adjoint(&self) -> Self {
        let t: Vec<_> = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.cols, self.rows, &t)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_values(|v| v * s)
    }

    /// Drops stored entries with magnitude at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let t: Vec<_> = self.iter().filter(|(_, _, v)| v.norm() > tol).collect();
        Self::from_triplets(self.rows, self.cols, &t)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut acc = alloc::vec![ZERO; other.cols];
        let mut mark = alloc::vec![usize::MAX; other.cols];
        let mut touched = Vec::new();
        row_ptr.push(0);
        for r in 0..self.rows {
            touched.clear();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.values[k];
                let mid = self.col_idx[k];
                for j in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.col_idx[j];
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = ZERO;
                        touched.push(c);
                    }
                    acc[c] += a * other.values[j];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                col_idx.push(c);
                values.push(acc[c]);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            rows: self.rows,
            cols: other.cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() * other.nnz());
        let mut values = Vec::with_capacity(self.nnz() * other.nnz());
        row_ptr.push(0);
        for ra in 0..self.rows {
            for rb in 0..other.rows {
                for ka in self.row_ptr[ra]..self.row_ptr[ra + 1] {
                    let ca = self.col_idx[ka];
                    let va = self.values[ka];
                    for kb in other.row_ptr[rb]..other.row_ptr[rb + 1] {
                        col_idx.push(ca * other.cols + other.col_idx[kb]);
                        values.push(va * other.values[kb]);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "addition dimension mismatch"
        );
        let mut t = self.triplets();
        t.extend(other.iter().map(|(r, c, v)| (r, c, v * sign)));
        Self::from_triplets(self.rows, self.cols, &t)
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = alloc::vec![ZERO; self.rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut s = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *out = s;
        }
    }

    /// `y = A^H x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows);
        let mut y = alloc::vec![ZERO; self.cols];
        for (r, xr) in x.iter().enumerate() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[k]] += self.values[k].conj() * xr;
            }
        }
        y
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| {
                self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|v| v.norm_sqr()).sum())
    }

    /// Largest entry magnitude of `self − self^H`.
    pub fn hermiticity_error(&self) -> f64 {
        (self - &self.adjoint())
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Dense copy in column-major order.
    pub fn to_dense_col_major(&self) -> Vec<Complex64> {
        let mut d = alloc::vec![ZERO; self.rows * self.cols];
        for (r, c, v) in self.iter() {
            d[r + c * self.rows] = v;
        }
        d
    }

    /// Text dump: a header line, then one `row col re im` line per entry.
    pub fn to_triplet_text(&self, ordering: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# {}x{} nnz={} ordering={}",
            self.rows,
            self.cols,
            self.nnz(),
            ordering
        );
        for (r, c, v) in self.iter() {
            let _ = writeln!(s, "{r} {c} {:.17e} {:.17e}", v.re, v.im);
        }
        s
    }
}

impl Add for &SparseMatrix {
    type Output = SparseMatrix;
    fn add(self, rhs: Self) -> SparseMatrix {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &SparseMatrix {
    type Output = SparseMatrix;
    fn sub(self, rhs: Self) -> SparseMatrix {
        self.combine(rhs, -1.0)
    }
}

impl Mul for &SparseMatrix {
    type Output = SparseMatrix;
    fn mul(self, rhs: Self) -> SparseMatrix {
        self.matmul(rhs)
    }
}

impl Mul<Complex64> for &SparseMatrix {
    type Output = SparseMatrix;
    fn mul(self, rhs: Complex64) -> SparseMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &SparseMatrix {
    type Output = SparseMatrix;
    fn mul(self, rhs: f64) -> SparseMatrix {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

impl Neg for &SparseMatrix {
    type Output = SparseMatrix;
    fn neg(self) -> SparseMatrix {
        self.map_values(|v| -v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense_mul(a: &SparseMatrix, b: &SparseMatrix) -> Vec<Complex64> {
        let (n, k, m) = (a.rows(), a.cols(), b.cols());
        let da = a.to_dense_col_major();
        let db = b.to_dense_col_major();
        let mut out = alloc::vec![ZERO; n * m];
        for i in 0..n {
            for j in 0..m {
                for l in 0..k {
                    out[i + j * n] += da[i + l * n] * db[l + j * k];
                }
            }
        }
        out
    }

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = SparseMatrix::from_triplets(2, 3, &[(1, 2, c(1.0, 0.0)), (0, 1, c(2.0, 1.0)), (1, 2, c(0.5, -1.0)), (1, 0, c(3.0, 0.0))]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), c(1.5, -1.0));
        assert_eq!(m.col_indices(), &[1, 0, 2]);
    }

    #[test]
    fn matmul_and_kron_agree_with_dense() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, c(1.0, 1.0)), (0, 1, c(2.0, 0.0)), (1, 1, c(0.0, -1.0))]);
        let b = SparseMatrix::from_triplets(2, 3, &[(0, 2, c(1.0, 0.0)), (1, 0, c(-1.0, 2.0)), (1, 1, c(3.0, 0.0))]);
        assert_eq!(a.matmul(&b).to_dense_col_major(), dense_mul(&a, &b));
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (4, 6));
        for (ra, ca, va) in a.iter() {
            for (rb, cb, vb) in b.iter() {
                assert_eq!(k.get(ra * 2 + rb, ca * 3 + cb), va * vb);
            }
        }
        assert_eq!(k.nnz(), a.nnz() * b.nnz());
    }

    #[test]
    fn adjoint_and_vector_products() {
        let a = SparseMatrix::from_triplets(2, 3, &[(0, 2, c(1.0, 2.0)), (1, 0, c(-1.0, 0.5))]);
        let h = a.adjoint();
        assert_eq!(h.get(2, 0), c(1.0, -2.0));
        let x = [c(1.0, 0.0), c(0.0, 1.0)];
        assert_eq!(a.adjoint_mul_vec(&x), h.mul_vec(&x));
        assert!((&a - &a).nnz() <= a.nnz());
        assert_eq!((&a - &a).norm_inf(), 0.0);
    }

    #[test]
    fn triplet_text_has_header_and_entries() {
        let a = SparseMatrix::identity(2);
        let s = a.to_triplet_text("test");
        assert!(s.starts_with("# 2x2 nnz=2 ordering=test"));
        assert_eq!(s.lines().count(), 3);
    }
}
