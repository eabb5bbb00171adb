//! Sparse direct factorizations.
//!
//! Both routes share a left-looking LU kernel: each column of `PAQ` is
//! obtained by a sparse triangular solve against the columns of `L` already
//! computed, restricted to the nonzero pattern found by a depth-first search.
//! The column order `Q` is a minimum-degree ordering of `A + Aᵀ`; rows are
//! pivoted either on the diagonal only (symmetric positive definite input)
//! or by threshold partial pivoting that prefers the diagonal.

use std::ops::{Div, Mul};

use num_complex::Complex64;

use super::ordering::minimum_degree;
use super::{CsrMatrix, Scalar};
use crate::error::{Error, Result};

/// Diagonal entries within this fraction of the column maximum are accepted
/// as pivots, which keeps the fill-reducing order intact in practice.
const DIAGONAL_PREFERENCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// `A = L D Lᵀ` with positive pivots, stored as `L·(D Lᵀ)`.
    SymmetricPositiveDefinite,
    /// `PAQ = LU` with threshold partial pivoting.
    PivotedLu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Pivoting {
    Diagonal,
    Threshold(f64),
}

/// Factored square matrix; immutable once built.
#[derive(Debug, Clone)]
pub struct Factorization<T> {
    kind: FactorKind,
    n: usize,
    /// Column order: step `k` eliminates original column `q[k]`.
    q: Vec<usize>,
    /// Row permutation: original row `i` is pivot row `pinv[i]`.
    pinv: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<T>,
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<T>,
}

/// Cholesky-type factorization of a real symmetric positive definite matrix.
pub fn factor_spd(a: &CsrMatrix<f64>) -> Result<Factorization<f64>> {
    factor(a, Pivoting::Diagonal)
}

/// Pivoted LU of a complex square matrix.
pub fn factor_complex(a: &CsrMatrix<Complex64>) -> Result<Factorization<Complex64>> {
    factor(a, Pivoting::Threshold(DIAGONAL_PREFERENCE))
}

struct Workspace<T> {
    x: Vec<T>,
    marked: Vec<bool>,
    reach: Vec<usize>,
    stack: Vec<usize>,
    cursor: Vec<usize>,
}

fn factor<T: Scalar>(a: &CsrMatrix<T>, pivoting: Pivoting) -> Result<Factorization<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.ncols(),
        });
    }
    let q = minimum_degree(&a.symmetric_adjacency());
    // Rows of the transpose are the columns of A.
    let cols = a.transpose();

    const UNSET: usize = usize::MAX;
    let mut pinv = vec![UNSET; n];
    let mut l_ptr = Vec::with_capacity(n + 1);
    let mut l_idx = Vec::new();
    let mut l_val: Vec<T> = Vec::new();
    let mut u_ptr = Vec::with_capacity(n + 1);
    let mut u_idx = Vec::new();
    let mut u_val: Vec<T> = Vec::new();
    let mut ws = Workspace {
        x: vec![T::zero(); n],
        marked: vec![false; n],
        reach: Vec::with_capacity(n),
        stack: Vec::with_capacity(n),
        cursor: Vec::with_capacity(n),
    };

    for (k, &col) in q.iter().enumerate() {
        l_ptr.push(l_idx.len());
        u_ptr.push(u_idx.len());

        // Reach of A(:,col) in the graph of L: the nonzero pattern of L \ A(:,col),
        // in topological order (reverse of DFS finish order).
        ws.reach.clear();
        for (i, _) in cols.row(col) {
            if !ws.marked[i] {
                dfs(i, &l_ptr, &l_idx, &pinv, &mut ws);
            }
        }
        for &i in &ws.reach {
            ws.marked[i] = false;
            ws.x[i] = T::zero();
        }
        for (i, v) in cols.row(col) {
            ws.x[i] = v;
        }
        for idx in (0..ws.reach.len()).rev() {
            let j = ws.reach[idx];
            let jj = pinv[j];
            if jj == UNSET {
                continue;
            }
            let xj = ws.x[j];
            let end = if jj + 1 < l_ptr.len() {
                l_ptr[jj + 1]
            } else {
                l_idx.len()
            };
            for p in l_ptr[jj] + 1..end {
                ws.x[l_idx[p]] -= l_val[p] * xj;
            }
        }

        let mut best: Option<usize> = None;
        let mut best_abs = -1.0f64;
        for &i in ws.reach.iter().rev() {
            if pinv[i] == UNSET {
                let t = ws.x[i].modulus();
                if t > best_abs {
                    best_abs = t;
                    best = Some(i);
                }
            } else {
                u_idx.push(pinv[i]);
                u_val.push(ws.x[i]);
            }
        }
        let ipiv = match pivoting {
            Pivoting::Diagonal => {
                if pinv[col] != UNSET {
                    return Err(Error::NotPositiveDefinite {
                        step: k,
                        pivot: 0.0,
                    });
                }
                let d = ws.x[col];
                if !(d.real() > 0.0) || d.imag() != 0.0 {
                    return Err(Error::NotPositiveDefinite {
                        step: k,
                        pivot: d.real(),
                    });
                }
                col
            }
            Pivoting::Threshold(tol) => {
                let ipiv = match best {
                    Some(i) if best_abs > 0.0 && best_abs.is_finite() => i,
                    _ => return Err(Error::SingularMatrix { step: k }),
                };
                if pinv[col] == UNSET && ws.x[col].modulus() >= tol * best_abs {
                    col
                } else {
                    ipiv
                }
            }
        };
        let pivot = ws.x[ipiv];
        u_idx.push(k);
        u_val.push(pivot);
        pinv[ipiv] = k;
        l_idx.push(ipiv);
        l_val.push(T::one());
        for &i in ws.reach.iter().rev() {
            if pinv[i] == UNSET {
                l_idx.push(i);
                l_val.push(ws.x[i] / pivot);
            }
            ws.x[i] = T::zero();
        }
    }
    l_ptr.push(l_idx.len());
    u_ptr.push(u_idx.len());
    for i in &mut l_idx {
        *i = pinv[*i];
    }

    let kind = match pivoting {
        Pivoting::Diagonal => FactorKind::SymmetricPositiveDefinite,
        Pivoting::Threshold(_) => FactorKind::PivotedLu,
    };
    Ok(Factorization {
        kind,
        n,
        q,
        pinv,
        l_ptr,
        l_idx,
        l_val,
        u_ptr,
        u_idx,
        u_val,
    })
}

/// Non-recursive depth-first search from `start` through the columns of `L`
/// finished so far. Finished nodes are appended to `ws.reach`.
fn dfs<T>(start: usize, l_ptr: &[usize], l_idx: &[usize], pinv: &[usize], ws: &mut Workspace<T>) {
    ws.stack.clear();
    ws.cursor.clear();
    ws.stack.push(start);
    ws.cursor.push(usize::MAX);
    while let Some(&j) = ws.stack.last() {
        let jj = pinv[j];
        let (lo, hi) = if jj == usize::MAX {
            (0, 0)
        } else {
            // Skip the unit diagonal stored first.
            (
                l_ptr[jj] + 1,
                if jj + 1 < l_ptr.len() {
                    l_ptr[jj + 1]
                } else {
                    l_idx.len()
                },
            )
        };
        let top = ws.cursor.len() - 1;
        if !ws.marked[j] {
            ws.marked[j] = true;
            ws.cursor[top] = lo;
        }
        let mut descended = false;
        let mut p = ws.cursor[top];
        while p < hi {
            let i = l_idx[p];
            p += 1;
            if !ws.marked[i] {
                ws.cursor[top] = p;
                ws.stack.push(i);
                ws.cursor.push(usize::MAX);
                descended = true;
                break;
            }
        }
        if !descended {
            ws.stack.pop();
            ws.cursor.pop();
            ws.reach.push(j);
        }
    }
}

impl<T: Scalar> Factorization<T> {
    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of both factors.
    pub fn factor_nnz(&self) -> usize {
        self.l_val.len() + self.u_val.len()
    }

    /// Solves `A x = b`.
    pub fn solve<X>(&self, b: &[X]) -> Result<Vec<X>>
    where
        X: Scalar + Mul<T, Output = X> + Div<T, Output = X>,
    {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: b.len(),
            });
        }
        let mut y = vec![X::zero(); self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.pinv[i]] = bi;
        }
        for j in 0..self.n {
            let yj = y[j];
            for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                y[self.l_idx[p]] -= yj * self.l_val[p];
            }
        }
        for j in (0..self.n).rev() {
            let last = self.u_ptr[j + 1] - 1;
            y[j] = y[j] / self.u_val[last];
            let yj = y[j];
            for p in self.u_ptr[j]..last {
                y[self.u_idx[p]] -= yj * self.u_val[p];
            }
        }
        let mut x = vec![X::zero(); self.n];
        for (k, &c) in self.q.iter().enumerate() {
            x[c] = y[k];
        }
        Ok(x)
    }
}
