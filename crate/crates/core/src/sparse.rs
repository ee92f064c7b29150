//! Compressed-sparse-row complex matrices.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Square or rectangular complex CSR matrix with sorted, duplicate-free
/// column indices in every row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Duplicates are summed. Explicit zeros are dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self { rows, cols, indptr, indices, values };
        m.prune();
        m
    }

    pub fn from_dense(dense: &[Vec<C64>]) -> Self {
        let rows = dense.len();
        let cols = dense.first().map_or(0, |r| r.len());
        let triplets = dense
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| (i, j, *v)))
            .filter(|t| t.2 != ZERO)
            .collect();
        Self::from_triplets(rows, cols, triplets)
    }

    fn prune(&mut self) {
        if !self.values.contains(&ZERO) {
            return;
        }
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k] != ZERO {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (idx, val) = self.row(r);
        match idx.binary_search(&c) {
            Ok(k) => val[k],
            Err(_) => ZERO,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (idx, val) = self.row(r);
            idx.iter().zip(val).map(move |(c, v)| (r, *c, *v))
        })
    }

    pub fn to_triplets(&self) -> Vec<(usize, usize, C64)> {
        self.iter().collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let mut out = vec![vec![ZERO; self.cols]; self.rows];
        for (r, c, v) in self.iter() {
            out[r][c] = v;
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out.prune();
        out
    }

    pub fn map_values(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = f(*v);
        }
        out.prune();
        out
    }

    pub fn conj(&self) -> Self {
        self.map_values(|v| v.conj())
    }

    pub fn transpose(&self) -> Self {
        let t = self.iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, t)
    }

    pub fn adjoint(&self) -> Self {
        let t = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.cols, self.rows, t)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        let t = self.iter().chain(other.iter()).collect();
        Self::from_triplets(self.rows, self.cols, t)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![ZERO; other.cols];
        let mut touched = vec![false; other.cols];
        let mut cols_in_row = Vec::new();
        for r in 0..self.rows {
            let (ai, av) = self.row(r);
            for (k, a) in ai.iter().zip(av) {
                let (bi, bv) = other.row(*k);
                for (c, b) in bi.iter().zip(bv) {
                    if !touched[*c] {
                        touched[*c] = true;
                        cols_in_row.push(*c);
                    }
                    acc[*c] += a * b;
                }
            }
            cols_in_row.sort_unstable();
            for &c in &cols_in_row {
                if acc[c] != ZERO {
                    indices.push(c);
                    values.push(acc[c]);
                }
                acc[c] = ZERO;
                touched[c] = false;
            }
            cols_in_row.clear();
            indptr[r + 1] = indices.len();
        }
        Self { rows: self.rows, cols: other.cols, indptr, indices, values }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut indptr = Vec::with_capacity(rows + 1);
        indptr.push(0);
        let mut indices = Vec::with_capacity(self.nnz() * other.nnz());
        let mut values = Vec::with_capacity(self.nnz() * other.nnz());
        for ra in 0..self.rows {
            let (ai, av) = self.row(ra);
            for rb in 0..other.rows {
                let (bi, bv) = other.row(rb);
                for (ca, a) in ai.iter().zip(av) {
                    for (cb, b) in bi.iter().zip(bv) {
                        indices.push(ca * other.cols + cb);
                        values.push(a * b);
                    }
                }
                indptr.push(indices.len());
            }
        }
        Self { rows, cols, indptr, indices, values }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            let (idx, val) = self.row(r);
            let mut s = ZERO;
            for (c, v) in idx.iter().zip(val) {
                s += v * x[*c];
            }
            *out = s;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max |A_ij − B_ij|
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// max |A_ij − conj(A_ji)|
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Replaces row `r` with the given entries.
    pub fn with_row(&self, r: usize, entries: &[(usize, C64)]) -> Self {
        let mut t: Vec<_> = self.iter().filter(|t| t.0 != r).collect();
        t.extend(entries.iter().map(|(c, v)| (r, *c, *v)));
        Self::from_triplets(self.rows, self.cols, t)
    }

    /// Diagonal entries; missing ones are zero.
    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub(crate) fn raw_parts(&self) -> (&[usize], &[usize], &[C64]) {
        (&self.indptr, &self.indices, &self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample() -> CsrMatrix {
        CsrMatrix::from_dense(&[
            vec![c(1.0, 0.0), c(0.0, 2.0), ZERO],
            vec![ZERO, c(3.0, -1.0), c(4.0, 0.0)],
        ])
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![(1, 1, c(1.0, 0.0)), (0, 0, c(2.0, 0.0)), (1, 1, c(0.5, 0.0)), (0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0))],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 1), c(1.5, 0.0));
        assert_eq!(m.get(0, 1), ZERO);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = sample();
        let b = a.adjoint();
        let p = a.matmul(&b).to_dense();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        for i in 0..2 {
            for j in 0..2 {
                let expect: C64 = (0..3).map(|k| ad[i][k] * bd[k][j]).sum();
                assert!((p[i][j] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn kron_layout() {
        let a = CsrMatrix::from_dense(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]]);
        let b = CsrMatrix::from_dense(&[vec![ZERO, c(1.0, 0.0)], vec![c(1.0, 0.0), ZERO]]);
        let k = a.kron(&b);
        assert_eq!(k.get(0, 1), c(1.0, 0.0));
        assert_eq!(k.get(1, 2), c(2.0, 0.0));
        assert_eq!(k.get(3, 2), c(4.0, 0.0));
        assert_eq!(k.get(2, 3), c(4.0, 0.0));
        assert_eq!(k.nnz(), 8);
    }

    #[test]
    fn adjoint_and_hermiticity() {
        let a = sample();
        assert_eq!(a.adjoint().adjoint(), a);
        let h = a.add(&CsrMatrix::zeros(2, 3)).matmul(&a.adjoint());
        assert!(h.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn with_row_replaces() {
        let a = CsrMatrix::identity(3).with_row(0, &[(1, c(1.0, 0.0)), (2, c(1.0, 0.0))]);
        assert_eq!(a.get(0, 0), ZERO);
        assert_eq!(a.get(0, 2), c(1.0, 0.0));
        assert_eq!(a.get(1, 1), c(1.0, 0.0));
    }
}
