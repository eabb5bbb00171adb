use std::io::Write;
use std::ops::Mul;

use num_complex::Complex64;

use super::Scalar;
use crate::error::{Error, Result};

/// Compressed sparse row matrix. Column indices are sorted within each row
/// and duplicates are summed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds from `(row, col, value)` triplets; entries with equal indices
    /// are summed in the order given.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, T)>,
    ) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r >= nrows {
                return Err(Error::DimensionMismatch {
                    expected: nrows,
                    actual: r + 1,
                });
            }
            if c >= ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    actual: c + 1,
                });
            }
        }
        // Stable, so duplicate contributions are summed in insertion order.
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1 {
            return Err(Error::DimensionMismatch {
                expected: nrows + 1,
                actual: row_ptr.len(),
            });
        }
        if col_idx.len() != values.len() || *row_ptr.last().unwrap() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: col_idx.len(),
                actual: values.len(),
            });
        }
        if col_idx.iter().any(|&c| c >= ncols) {
            return Err(Error::DimensionMismatch {
                expected: ncols,
                actual: ncols + 1,
            });
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
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

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => T::zero(),
        }
    }

    /// `y = A x` for a vector over any scalar that `T` can scale.
    pub fn spmv<X>(&self, x: &[X]) -> Result<Vec<X>>
    where
        X: Scalar + Mul<T, Output = X>,
    {
        let mut y = vec![X::zero(); self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into<X>(&self, x: &[X], y: &mut [X]) -> Result<()>
    where
        X: Scalar + Mul<T, Output = X>,
    {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                actual: x.len(),
            });
        }
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                actual: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = X::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.col_idx[p]] * self.values[p];
            }
            *yi = acc;
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for i in 0..self.nrows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.col_idx[p];
                let dst = next[c];
                col_idx[dst] = i;
                values[dst] = self.values[p];
                next[c] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0f64; self.ncols];
        for (c, v) in self.col_idx.iter().zip(&self.values) {
            sums[*c] += v.modulus();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest `|a_ij - a_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).modulus());
            }
        }
        worst
    }

    pub fn same_pattern<U>(&self, other: &CsrMatrix<U>) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
    }

    pub fn scale(&self, alpha: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// Dense row-major copy, for tests and small problems.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    /// Off-diagonal adjacency lists of `A + Aᵀ`.
    pub fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nrows];
        for i in 0..self.nrows {
            for &j in &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]] {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}

impl CsrMatrix<f64> {
    /// `Σ cᵢ Aᵢ` over real matrices that share one pattern.
    pub fn complex_combination(
        terms: &[(Complex64, &CsrMatrix<f64>)],
    ) -> Result<CsrMatrix<Complex64>> {
        let first = terms
            .first()
            .ok_or(Error::DimensionMismatch {
                expected: 1,
                actual: 0,
            })?
            .1;
        let mut values = vec![Complex64::new(0.0, 0.0); first.nnz()];
        for (coef, m) in terms {
            if !first.same_pattern(m) {
                return Err(Error::DimensionMismatch {
                    expected: first.nnz(),
                    actual: m.nnz(),
                });
            }
            for (acc, v) in values.iter_mut().zip(&m.values) {
                *acc += coef * v;
            }
        }
        Ok(CsrMatrix {
            nrows: first.nrows,
            ncols: first.ncols,
            row_ptr: first.row_ptr.clone(),
            col_idx: first.col_idx.clone(),
            values,
        })
    }

    /// Coordinate text export: one `row col value` line per stored entry, 0-based.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                writeln!(out, "{i} {j} {v:.17e}")?;
            }
        }
        Ok(())
    }
}
