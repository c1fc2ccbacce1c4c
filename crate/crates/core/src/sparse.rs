//! Complex compressed-sparse-row matrices.
//!
//! Every matrix produced here is canonical: column indices are strictly
//! increasing within each row. Structural zeros produced by products are
//! kept, so sparsity patterns stay predictable under Galerkin products.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Rows below this count are processed serially.
const PAR_MIN_ROWS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, checking canonical form.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<C64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::ShapeMismatch(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 || *row_offsets.last().unwrap() != col_indices.len() {
            return Err(Error::ShapeMismatch("row_offsets do not span col_indices".into()));
        }
        if col_indices.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: col_indices.len(),
                actual: values.len(),
            });
        }
        for r in 0..nrows {
            let (start, end) = (row_offsets[r], row_offsets[r + 1]);
            if end < start {
                return Err(Error::ShapeMismatch(format!("row_offsets decrease at row {r}")));
            }
            let cols = &col_indices[start..end];
            if cols.iter().any(|&c| c >= ncols) {
                return Err(Error::ShapeMismatch(format!("column out of range in row {r}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::ShapeMismatch(format!("row {r} is not strictly sorted")));
            }
        }
        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Assembles from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); nrows];
        for (r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::ShapeMismatch(format!(
                    "triplet ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
            rows[r].push((c, v));
        }
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let (s, e) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[s..e], &self.values[s..e])
    }

    /// Entry lookup by binary search; absent entries read as zero.
    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    #[inline]
    pub fn row_dot(&self, r: usize, x: &[C64]) -> C64 {
        let (cols, vals) = self.row(r);
        let mut acc = C64::new(0.0, 0.0);
        for (&c, &v) in cols.iter().zip(vals) {
            acc += v * x[c];
        }
        acc
    }

    /// y = A x
    pub fn spmv(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        self.check_vec_shapes(x.len(), y.len())?;
        if self.nrows >= PAR_MIN_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, yr)| *yr = self.row_dot(r, x));
        } else {
            for (r, yr) in y.iter_mut().enumerate() {
                *yr = self.row_dot(r, x);
            }
        }
        Ok(())
    }

    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.spmv(x, &mut y)?;
        Ok(y)
    }

    /// r = b - A x
    pub fn residual(&self, b: &[C64], x: &[C64], r: &mut [C64]) -> Result<()> {
        self.check_vec_shapes(x.len(), r.len())?;
        if b.len() != self.nrows {
            return Err(Error::LengthMismatch { expected: self.nrows, actual: b.len() });
        }
        if self.nrows >= PAR_MIN_ROWS {
            r.par_iter_mut()
                .enumerate()
                .for_each(|(i, ri)| *ri = b[i] - self.row_dot(i, x));
        } else {
            for (i, ri) in r.iter_mut().enumerate() {
                *ri = b[i] - self.row_dot(i, x);
            }
        }
        Ok(())
    }

    fn check_vec_shapes(&self, xlen: usize, ylen: usize) -> Result<()> {
        if xlen != self.ncols {
            return Err(Error::LengthMismatch { expected: self.ncols, actual: xlen });
        }
        if ylen != self.nrows {
            return Err(Error::LengthMismatch { expected: self.nrows, actual: ylen });
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![C64::new(0.0, 0.0); self.nnz()];
        // rows visited in increasing order keep the output rows sorted
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = next[c];
                col_indices[slot] = r;
                values[slot] = v;
                next[c] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Sparse product `self * other` (row-wise Gustavson).
    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let ncols = other.ncols;
        let row_product = |acc: &mut (Vec<C64>, Vec<bool>, Vec<usize>), r: usize| {
            let (dense, seen, touched) = acc;
            touched.clear();
            let (acols, avals) = self.row(r);
            for (&k, &a) in acols.iter().zip(avals) {
                let (bcols, bvals) = other.row(k);
                for (&c, &b) in bcols.iter().zip(bvals) {
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    dense[c] += a * b;
                }
            }
            touched.sort_unstable();
            let mut cols = Vec::with_capacity(touched.len());
            let mut vals = Vec::with_capacity(touched.len());
            for &c in touched.iter() {
                cols.push(c);
                vals.push(dense[c]);
                dense[c] = C64::new(0.0, 0.0);
                seen[c] = false;
            }
            (cols, vals)
        };
        let init = || (vec![C64::new(0.0, 0.0); ncols], vec![false; ncols], Vec::new());
        let rows: Vec<(Vec<usize>, Vec<C64>)> = if self.nrows >= PAR_MIN_ROWS {
            (0..self.nrows).into_par_iter().map_init(init, row_product).collect()
        } else {
            let mut acc = init();
            (0..self.nrows).map(|r| row_product(&mut acc, r)).collect()
        };
        let nnz: usize = rows.iter().map(|(c, _)| c.len()).sum();
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_offsets.push(0);
        for (cols, vals) in rows {
            col_indices.extend(cols);
            values.extend(vals);
            row_offsets.push(col_indices.len());
        }
        Ok(CsrMatrix { nrows: self.nrows, ncols, row_offsets, col_indices, values })
    }

    /// Galerkin product `Pᵀ H P`.
    pub fn triple_product(p: &CsrMatrix, h: &CsrMatrix) -> Result<CsrMatrix> {
        if h.nrows != h.ncols || h.ncols != p.nrows {
            return Err(Error::ShapeMismatch(format!(
                "triple product needs square H matching P rows: H {}x{}, P {}x{}",
                h.nrows, h.ncols, p.nrows, p.ncols
            )));
        }
        let hp = h.matmul(p)?;
        p.transpose().matmul(&hp)
    }

    /// Sum of two matrices of identical shape; the pattern is the union.
    pub fn add(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        self.linear_combination(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: C64, other: &CsrMatrix, b: C64) -> Result<CsrMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::ShapeMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_offsets.push(0);
        for r in 0..self.nrows {
            let (ac, av) = self.row(r);
            let (bc, bv) = other.row(r);
            let (mut i, mut j) = (0, 0);
            while i < ac.len() || j < bc.len() {
                if j == bc.len() || (i < ac.len() && ac[i] < bc[j]) {
                    col_indices.push(ac[i]);
                    values.push(a * av[i]);
                    i += 1;
                } else if i == ac.len() || bc[j] < ac[i] {
                    col_indices.push(bc[j]);
                    values.push(b * bv[j]);
                    j += 1;
                } else {
                    col_indices.push(ac[i]);
                    values.push(a * av[i] + b * bv[j]);
                    i += 1;
                    j += 1;
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_offsets, col_indices, values })
    }

    pub fn scale(&mut self, s: C64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// Left-multiplies by a diagonal matrix: row r scaled by `d[r]`.
    pub fn scale_rows(&mut self, d: &[C64]) -> Result<()> {
        if d.len() != self.nrows {
            return Err(Error::LengthMismatch { expected: self.nrows, actual: d.len() });
        }
        for r in 0..self.nrows {
            let (s, e) = (self.row_offsets[r], self.row_offsets[r + 1]);
            for v in &mut self.values[s..e] {
                *v *= d[r];
            }
        }
        Ok(())
    }

    pub fn has_symmetric_pattern(&self) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let t = self.transpose();
        t.row_offsets == self.row_offsets && t.col_indices == self.col_indices
    }

    /// Row-major dense copy; intended for small matrices and tests.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut d = vec![C64::new(0.0, 0.0); self.nrows * self.ncols];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d[r * self.ncols + c] = v;
            }
        }
        d
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).1.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `xᴴ y`.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}
