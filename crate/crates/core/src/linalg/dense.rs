//! Small dense complex matrices and the complex Schur decomposition used to
//! extract Ritz values.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// QR sweeps allowed per eigenvalue before giving up.
pub const MAX_SWEEPS_PER_EIGENVALUE: usize = 50;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Column-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.rows + i]
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Leading `rows × cols` block.
    pub fn block(&self, rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = self[(i, j)];
            }
        }
        m
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b == ZERO {
                    continue;
                }
                for i in 0..self.rows {
                    out[(i, j)] += self[(i, k)] * b;
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }
}

/// Rotation `[c s; -conj(s) c]` mapping `(f, g)` to `(r, 0)`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g == ZERO {
        return (1.0, ZERO);
    }
    if f == ZERO {
        return (0.0, g.conj() / g.norm());
    }
    let fa = f.norm();
    let norm = fa.hypot(g.norm());
    (fa / norm, (f / fa) * g.conj() / norm)
}

/// Reduces a square matrix to upper Hessenberg form `A = Q H Qᴴ`.
pub fn hessenberg_reduce(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = a.rows;
    assert_eq!(n, a.cols, "square matrix required");
    let mut h = a.clone();
    let mut q = DenseMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = v[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        let phase = if v[0] == ZERO {
            ONE
        } else {
            v[0] / v[0].norm()
        };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= vn);

        // H <- (I - 2vvᴴ) H
        for j in 0..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(r, vr)| vr.conj() * h[(k + 1 + r, j)])
                .sum();
            for (r, vr) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= 2.0 * vr * s;
            }
        }
        // H <- H (I - 2vvᴴ), Q <- Q (I - 2vvᴴ)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let s: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(r, vr)| m[(i, k + 1 + r)] * vr)
                    .sum();
                for (r, vr) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= 2.0 * s * vr.conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Complex Schur form `A = Z T Zᴴ` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: DenseMatrix,
    pub z: DenseMatrix,
}

impl Schur {
    /// Schur decomposition of a general square matrix.
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        let (h, q) = hessenberg_reduce(a);
        Self::from_hessenberg(h, q)
    }

    /// Shifted QR iteration on an upper Hessenberg `h`, accumulating the
    /// rotations into `z` (pass the identity for `h` itself).
    pub fn from_hessenberg(mut t: DenseMatrix, mut z: DenseMatrix) -> Result<Self> {
        let n = t.rows;
        let norm = t.frobenius_norm().max(f64::MIN_POSITIVE);
        let eps = f64::EPSILON;
        let mut hi = n;
        let mut sweeps = 0usize;
        let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);
        while hi > 1 {
            let last = hi - 1;
            let mut l = last;
            while l > 0 {
                let mut s = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
                if s == 0.0 {
                    s = norm;
                }
                if t[(l, l - 1)].norm() <= eps * s {
                    t[(l, l - 1)] = ZERO;
                    break;
                }
                l -= 1;
            }
            if l == last {
                hi -= 1;
                sweeps = 0;
                continue;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::NoConvergence {
                    iterations: sweeps - 1,
                    converged: n - hi,
                    total: n,
                });
            }

            let mu = if sweeps % 10 == 0 {
                // Exceptional shift to break cycles.
                t[(last, last)] + 0.75 * t[(last, last - 1)].norm()
            } else {
                let a = t[(last - 1, last - 1)];
                let b = t[(last - 1, last)];
                let c = t[(last, last - 1)];
                let d = t[(last, last)];
                let half = 0.5 * (a - d);
                let disc = (half * half + b * c).sqrt();
                let e1 = 0.5 * (a + d) + disc;
                let e2 = 0.5 * (a + d) - disc;
                if (e1 - d).norm() <= (e2 - d).norm() {
                    e1
                } else {
                    e2
                }
            };

            for k in l..=last {
                t[(k, k)] -= mu;
            }
            rot.clear();
            for k in l..last {
                let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
                for j in k..n {
                    let a = t[(k, j)];
                    let b = t[(k + 1, j)];
                    t[(k, j)] = c * a + s * b;
                    t[(k + 1, j)] = -s.conj() * a + c * b;
                }
                t[(k + 1, k)] = ZERO;
                rot.push((c, s));
            }
            for (idx, &(c, s)) in rot.iter().enumerate() {
                let k = l + idx;
                for i in 0..=(k + 1) {
                    let a = t[(i, k)];
                    let b = t[(i, k + 1)];
                    t[(i, k)] = a * c + b * s.conj();
                    t[(i, k + 1)] = -a * s + b * c;
                }
                for i in 0..z.rows {
                    let a = z[(i, k)];
                    let b = z[(i, k + 1)];
                    z[(i, k)] = a * c + b * s.conj();
                    z[(i, k + 1)] = -a * s + b * c;
                }
            }
            for k in l..=last {
                t[(k, k)] += mu;
            }
        }
        for j in 0..n {
            for i in j + 1..n {
                t[(i, j)] = ZERO;
            }
        }
        Ok(Self { t, z })
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.rows).map(|i| self.t[(i, i)]).collect()
    }

    /// Swaps the diagonal entries at `k` and `k + 1`, keeping `Z T Zᴴ` fixed.
    fn swap_adjacent(&mut self, k: usize) {
        let n = self.t.rows;
        let t11 = self.t[(k, k)];
        let t22 = self.t[(k + 1, k + 1)];
        let (c, s) = givens(self.t[(k, k + 1)], t22 - t11);
        for j in k + 2..n {
            let a = self.t[(k, j)];
            let b = self.t[(k + 1, j)];
            self.t[(k, j)] = c * a + s * b;
            self.t[(k + 1, j)] = -s.conj() * a + c * b;
        }
        for i in 0..k {
            let a = self.t[(i, k)];
            let b = self.t[(i, k + 1)];
            self.t[(i, k)] = a * c + b * s.conj();
            self.t[(i, k + 1)] = -a * s + b * c;
        }
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
        for i in 0..self.z.rows {
            let a = self.z[(i, k)];
            let b = self.z[(i, k + 1)];
            self.z[(i, k)] = a * c + b * s.conj();
            self.z[(i, k + 1)] = -a * s + b * c;
        }
    }

    /// Moves the eigenvalues currently at positions `wanted` (in that order)
    /// to the leading diagonal positions.
    pub fn reorder(&mut self, wanted: &[usize]) {
        let n = self.t.rows;
        let mut label: Vec<usize> = (0..n).collect();
        for (target, &w) in wanted.iter().enumerate() {
            let mut pos = label
                .iter()
                .position(|&x| x == w)
                .expect("eigenvalue index out of range");
            while pos > target {
                self.swap_adjacent(pos - 1);
                label.swap(pos - 1, pos);
                pos -= 1;
            }
        }
    }

    /// Eigenvector of the triangular factor for the eigenvalue at position `j`.
    pub fn triangular_eigenvector(&self, j: usize) -> Vec<Complex64> {
        let t = &self.t;
        let n = t.rows;
        let lambda = t[(j, j)];
        let floor = f64::EPSILON * t.frobenius_norm().max(f64::MIN_POSITIVE);
        let mut x = vec![ZERO; n];
        x[j] = ONE;
        for i in (0..j).rev() {
            let s: Complex64 = (i + 1..=j).map(|k| t[(i, k)] * x[k]).sum();
            let mut d = t[(i, i)] - lambda;
            if d.norm() < floor {
                d = Complex64::new(floor, 0.0);
            }
            x[i] = -s / d;
        }
        x
    }

    /// Eigenvector of the original matrix for the eigenvalue at position `j`.
    pub fn eigenvector(&self, j: usize) -> Vec<Complex64> {
        let y = self.triangular_eigenvector(j);
        let n = self.z.rows;
        let mut v = vec![ZERO; n];
        for (k, yk) in y.iter().enumerate().take(j + 1) {
            for i in 0..n {
                v[i] += self.z[(i, k)] * yk;
            }
        }
        v
    }
}

/// Eigenvalues of an upper Hessenberg matrix by shifted QR iteration.
pub fn hessenberg_eig(h: &DenseMatrix) -> Result<Vec<Complex64>> {
    if h.rows != h.cols {
        return Err(Error::DimensionMismatch {
            expected: h.rows,
            actual: h.cols,
        });
    }
    let n = h.rows;
    Ok(Schur::from_hessenberg(h.clone(), DenseMatrix::zeros(0, n))?.eigenvalues())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    fn determinant(m: &DenseMatrix) -> Complex64 {
        let n = m.rows();
        let mut a = m.clone();
        let mut det = ONE;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
                .unwrap();
            if p != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = tmp;
                }
                det = -det;
            }
            let piv = a[(k, k)];
            det *= piv;
            for i in k + 1..n {
                let f = a[(i, k)] / piv;
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        det
    }

    #[test]
    fn identity_eigenvalues() {
        let ev = hessenberg_eig(&DenseMatrix::identity(5)).unwrap();
        assert_eq!(ev, vec![ONE; 5]);
    }

    #[test]
    fn companion_of_z2_minus_1() {
        let h = DenseMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]);
        let mut ev = hessenberg_eig(&h).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((ev[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn trace_and_determinant_of_random_hessenberg() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut h = random_matrix(6, &mut rng);
            for j in 0..6 {
                for i in j + 2..6 {
                    h[(i, j)] = ZERO;
                }
            }
            let ev = hessenberg_eig(&h).unwrap();
            let sum: Complex64 = ev.iter().sum();
            let prod: Complex64 = ev.iter().product();
            let norm = h.frobenius_norm();
            assert!((sum - h.trace()).norm() <= 1e-10 * norm);
            let det = determinant(&h);
            assert!((prod - det).norm() <= 1e-9 * det.norm());
        }
    }

    #[test]
    fn recovers_known_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 12;
        let d: Vec<Complex64> = (0..n).map(|k| c(k as f64 - 4.0, 0.5 * k as f64)).collect();
        // Random unitary from the Schur vectors of a random matrix.
        let q = Schur::new(&random_matrix(n, &mut rng)).unwrap().z;
        let mut dm = DenseMatrix::zeros(n, n);
        for k in 0..n {
            dm[(k, k)] = d[k];
        }
        let a = q.adjoint().matmul(&dm).matmul(&q);
        let (h, _) = hessenberg_reduce(&a);
        let ev = hessenberg_eig(&h).unwrap();
        for want in &d {
            let best = ev
                .iter()
                .map(|e| (e - want).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "missing {want}");
        }
    }

    #[test]
    fn schur_reconstructs_and_reorders() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 10;
        let a = random_matrix(n, &mut rng);
        let mut s = Schur::new(&a).unwrap();
        let norm = a.frobenius_norm();
        let check = |s: &Schur| {
            let r = s.z.matmul(&s.t).matmul(&s.z.adjoint()).sub(&a);
            assert!(r.frobenius_norm() < 1e-12 * norm);
            let orth = s.z.adjoint().matmul(&s.z).sub(&DenseMatrix::identity(n));
            assert!(orth.frobenius_norm() < 1e-12);
            for j in 0..n {
                for i in j + 1..n {
                    assert_eq!(s.t[(i, j)], ZERO);
                }
            }
        };
        check(&s);
        let before = s.eigenvalues();
        let mut by_mod: Vec<usize> = (0..n).collect();
        by_mod.sort_by(|&i, &j| before[j].norm().total_cmp(&before[i].norm()));
        s.reorder(&by_mod[..4]);
        check(&s);
        let after = s.eigenvalues();
        for (k, &i) in by_mod[..4].iter().enumerate() {
            assert!((after[k] - before[i]).norm() < 1e-10 * norm);
        }
        for j in 0..n {
            let v = s.eigenvector(j);
            let av: Vec<Complex64> = (0..n)
                .map(|i| (0..n).map(|k| a[(i, k)] * v[k]).sum::<Complex64>())
                .collect();
            let vn = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            let res: f64 = av
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - after[j] * y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-10 * norm * vn);
        }
    }
}
