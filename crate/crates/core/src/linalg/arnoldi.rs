//! Arnoldi factorizations and Krylov-Schur restarts.

use num_complex::Complex64;

use super::dense::{DenseMatrix, Schur};
use super::{dot, norm2};
use crate::error::{Error, Result};

/// A new direction counts as breakdown below this fraction of `‖Op v_j‖`.
pub const BREAKDOWN_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `Op V_k = V_{k+1} H` with orthonormal `V`. After a Krylov-Schur restart
/// `H` is no longer Hessenberg, but the relation and orthonormality hold.
#[derive(Debug, Clone)]
pub struct KrylovState {
    /// `k + 1` basis vectors, or `k` after breakdown.
    pub basis: Vec<Vec<Complex64>>,
    /// `(capacity + 1) × capacity`; only the leading `(k+1) × k` block is live.
    pub projection: DenseMatrix,
    pub dim: usize,
    pub breakdown: bool,
}

impl KrylovState {
    fn start(start: &[Complex64], capacity: usize) -> Result<Self> {
        let norm = norm2(start);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroStartVector);
        }
        let v0: Vec<Complex64> = start.iter().map(|z| z / norm).collect();
        Ok(Self {
            basis: vec![v0],
            projection: DenseMatrix::zeros(capacity + 1, capacity),
            dim: 0,
            breakdown: false,
        })
    }

    pub fn n(&self) -> usize {
        self.basis[0].len()
    }

    /// Leading `(k+1) × k` block of the projected matrix.
    pub fn hessenberg(&self) -> DenseMatrix {
        let rows = if self.breakdown {
            self.dim
        } else {
            self.dim + 1
        };
        self.projection.block(rows, self.dim)
    }

    /// Grows the factorization to `target` columns using classical
    /// Gram-Schmidt with one re-orthogonalization pass.
    pub fn extend<F>(&mut self, op: &mut F, target: usize) -> Result<()>
    where
        F: FnMut(&[Complex64], &mut [Complex64]) -> Result<()>,
    {
        let n = self.n();
        if target > self.projection.cols() {
            return Err(Error::InvalidSolverParameters(format!(
                "Krylov dimension {target} exceeds capacity {}",
                self.projection.cols()
            )));
        }
        let mut w = vec![ZERO; n];
        while self.dim < target && !self.breakdown {
            let j = self.dim;
            op(&self.basis[j], &mut w)?;
            let op_norm = norm2(&w);
            let mut h = vec![ZERO; j + 1];
            for _pass in 0..2 {
                let coeffs: Vec<Complex64> = self.basis.iter().map(|v| dot(v, &w)).collect();
                for (v, c) in self.basis.iter().zip(&coeffs) {
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
                for (hi, c) in h.iter_mut().zip(coeffs) {
                    *hi += c;
                }
            }
            let beta = norm2(&w);
            for (i, hi) in h.into_iter().enumerate() {
                self.projection[(i, j)] = hi;
            }
            self.projection[(j + 1, j)] = Complex64::new(beta, 0.0);
            self.dim = j + 1;
            if beta <= BREAKDOWN_TOL * op_norm || beta == 0.0 {
                self.projection[(j + 1, j)] = ZERO;
                self.breakdown = true;
            } else {
                self.basis.push(w.iter().map(|z| z / beta).collect());
            }
        }
        Ok(())
    }

    /// `‖VᴴV − I‖_F` over the stored basis.
    pub fn orthonormality_error(&self) -> f64 {
        let m = self.basis.len();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                let g = dot(&self.basis[i], &self.basis[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                acc += (g - target).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `‖Op V_k − V_{k+1} H‖_F`, recomputing `Op V_k`.
    pub fn relation_error<F>(&self, op: &mut F) -> Result<f64>
    where
        F: FnMut(&[Complex64], &mut [Complex64]) -> Result<()>,
    {
        let n = self.n();
        let rows = self.basis.len().min(self.dim + 1);
        let mut acc = 0.0;
        let mut w = vec![ZERO; n];
        for j in 0..self.dim {
            op(&self.basis[j], &mut w)?;
            for i in 0..rows {
                let h = self.projection[(i, j)];
                for (wk, vk) in w.iter_mut().zip(&self.basis[i]) {
                    *wk -= h * vk;
                }
            }
            acc += w.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        Ok(acc.sqrt())
    }
}

/// Arnoldi factorization of dimension `k` started from `start`.
pub fn arnoldi<F>(mut op: F, start: &[Complex64], k: usize) -> Result<KrylovState>
where
    F: FnMut(&[Complex64], &mut [Complex64]) -> Result<()>,
{
    if k == 0 || k > start.len() {
        return Err(Error::InvalidSolverParameters(format!(
            "Krylov dimension must be in 1..={}, got {k}",
            start.len()
        )));
    }
    let mut state = KrylovState::start(start, k)?;
    state.extend(&mut op, k)?;
    Ok(state)
}

/// Ritz value of the operator with its vector (unit norm) and the residual
/// norm `‖Op x − θx‖` read off the factorization.
#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    pub residual_estimate: f64,
}

/// Krylov-Schur iteration targeting the Ritz values of largest modulus.
#[derive(Debug, Clone)]
pub struct KrylovSchur {
    state: KrylovState,
    max_dim: usize,
}

impl KrylovSchur {
    pub fn new<F>(op: &mut F, start: &[Complex64], max_dim: usize) -> Result<Self>
    where
        F: FnMut(&[Complex64], &mut [Complex64]) -> Result<()>,
    {
        if max_dim == 0 || max_dim > start.len() {
            return Err(Error::InvalidSolverParameters(format!(
                "Krylov dimension must be in 1..={}, got {max_dim}",
                start.len()
            )));
        }
        let mut state = KrylovState::start(start, max_dim)?;
        state.extend(op, max_dim)?;
        Ok(Self { state, max_dim })
    }

    pub fn state(&self) -> &KrylovState {
        &self.state
    }

    fn schur_sorted(&self) -> Result<(Schur, Vec<usize>)> {
        let k = self.state.dim;
        let schur = Schur::new(&self.state.projection.block(k, k))?;
        let theta = schur.eigenvalues();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| theta[b].norm().total_cmp(&theta[a].norm()).then(a.cmp(&b)));
        Ok((schur, order))
    }

    /// Residual coupling row `e_{k+1}ᵀ H` expressed in the Schur basis.
    fn residual_row(&self, z: &DenseMatrix) -> Vec<Complex64> {
        let k = self.state.dim;
        if self.state.breakdown {
            return vec![ZERO; k];
        }
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|l| self.state.projection[(k, l)] * z[(l, i)])
                    .sum()
            })
            .collect()
    }

    /// The `count` Ritz pairs of largest `|θ|`, in decreasing order.
    pub fn ritz_pairs(&self, count: usize) -> Result<Vec<RitzPair>> {
        let k = self.state.dim;
        let n = self.state.n();
        let (schur, order) = self.schur_sorted()?;
        let b = self.residual_row(&schur.z);
        let mut pairs = Vec::with_capacity(count.min(k));
        for &j in order.iter().take(count) {
            let y = schur.triangular_eigenvector(j);
            let s: Vec<Complex64> = (0..k)
                .map(|l| (0..=j).map(|i| schur.z[(l, i)] * y[i]).sum())
                .collect();
            let mut x = vec![ZERO; n];
            for (v, sl) in self.state.basis.iter().take(k).zip(&s) {
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += sl * vi;
                }
            }
            let xn = norm2(&x);
            x.iter_mut().for_each(|z| *z /= xn);
            let ynorm = norm2(&y);
            let res: Complex64 = (0..=j).map(|i| b[i] * y[i]).sum();
            pairs.push(RitzPair {
                value: schur.t[(j, j)],
                vector: x,
                residual_estimate: res.norm() / ynorm,
            });
        }
        Ok(pairs)
    }

    pub fn converged_invariant_subspace(&self) -> bool {
        self.state.breakdown
    }

    /// Keeps the `keep` dominant Schur vectors and re-extends to full size.
    pub fn restart<F>(&mut self, op: &mut F, keep: usize) -> Result<()>
    where
        F: FnMut(&[Complex64], &mut [Complex64]) -> Result<()>,
    {
        let k = self.state.dim;
        if self.state.breakdown || keep == 0 || keep >= k {
            return Ok(());
        }
        let n = self.state.n();
        let (mut schur, order) = self.schur_sorted()?;
        schur.reorder(&order[..keep]);
        let b = self.residual_row(&schur.z);

        let mut basis = Vec::with_capacity(self.max_dim + 1);
        for i in 0..keep {
            let mut u = vec![ZERO; n];
            for (l, v) in self.state.basis.iter().take(k).enumerate() {
                let zl = schur.z[(l, i)];
                for (ui, vi) in u.iter_mut().zip(v) {
                    *ui += zl * vi;
                }
            }
            basis.push(u);
        }
        basis.push(self.state.basis[k].clone());

        let mut proj = DenseMatrix::zeros(self.max_dim + 1, self.max_dim);
        for j in 0..keep {
            for i in 0..=j {
                proj[(i, j)] = schur.t[(i, j)];
            }
            proj[(keep, j)] = b[j];
        }
        self.state = KrylovState {
            basis,
            projection: proj,
            dim: keep,
            breakdown: false,
        };
        self.state.extend(op, self.max_dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_start(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn matrix_op(
        a: &CsrMatrix<Complex64>,
    ) -> impl FnMut(&[Complex64], &mut [Complex64]) -> Result<()> + '_ {
        move |x, y| a.spmv_into(x, y)
    }

    #[test]
    fn identity_breaks_down_immediately() {
        let id = CsrMatrix::<Complex64>::identity(6);
        let st = arnoldi(matrix_op(&id), &random_start(6, 1), 3).unwrap();
        assert!(st.breakdown);
        assert_eq!(st.dim, 1);
        let h = st.hessenberg();
        assert_eq!((h.rows(), h.cols()), (1, 1));
        assert!((h[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_operator_ritz_values() {
        let d: Vec<Complex64> = (1..=10).map(|k| c(k as f64, 0.0)).collect();
        let a = CsrMatrix::from_diagonal(&d);
        let st = arnoldi(matrix_op(&a), &random_start(10, 2), 10).unwrap();
        let k = st.dim;
        let ev = crate::linalg::hessenberg_eig(&st.projection.block(k, k)).unwrap();
        for want in &d {
            let best = ev
                .iter()
                .map(|e| (e - want).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "{want}");
        }
    }

    #[test]
    fn zero_start_rejected() {
        let id = CsrMatrix::<Complex64>::identity(3);
        assert!(matches!(
            arnoldi(matrix_op(&id), &[ZERO; 3], 2),
            Err(Error::ZeroStartVector)
        ));
    }

    fn random_operator(n: usize, seed: u64) -> CsrMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))));
        }
        for _ in 0..6 * n {
            t.push((
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            ));
        }
        CsrMatrix::from_triplets(n, n, t).unwrap()
    }

    #[test]
    fn orthonormality_and_relation() {
        for seed in 0..5 {
            let a = random_operator(120, seed);
            let mut op = matrix_op(&a);
            let st = arnoldi(&mut op, &random_start(120, seed + 10), 40).unwrap();
            assert!(st.orthonormality_error() <= 1e-10);
            let h = st.hessenberg();
            assert!(st.relation_error(&mut op).unwrap() <= 1e-8 * h.frobenius_norm());
        }
    }

    #[test]
    fn krylov_schur_restarts_find_dominant_eigenvalues() {
        let n = 300;
        // Dominant eigenvalues 100..=95 on top of a bulk in (0, 10).
        let mut d: Vec<Complex64> = (0..n)
            .map(|k| c(10.0 * (k as f64 + 0.5) / n as f64, 0.1))
            .collect();
        for (k, slot) in d.iter_mut().take(6).enumerate() {
            *slot = c(100.0 - k as f64, 1.0);
        }
        let a = CsrMatrix::from_diagonal(&d);
        let mut op = matrix_op(&a);
        let mut ks = KrylovSchur::new(&mut op, &random_start(n, 4), 14).unwrap();
        for _ in 0..30 {
            let pairs = ks.ritz_pairs(6).unwrap();
            if pairs.iter().all(|p| p.residual_estimate < 1e-10 * 100.0) {
                break;
            }
            ks.restart(&mut op, 8).unwrap();
            assert!(ks.state().orthonormality_error() < 1e-10);
            let rel = ks.state().relation_error(&mut op).unwrap();
            assert!(rel < 1e-8 * 100.0, "relation error {rel}");
        }
        let pairs = ks.ritz_pairs(6).unwrap();
        for (k, p) in pairs.iter().enumerate() {
            assert!(
                (p.value - c(100.0 - k as f64, 1.0)).norm() < 1e-8,
                "{}",
                p.value
            );
            let ax = a.spmv(&p.vector).unwrap();
            let r: f64 = ax
                .iter()
                .zip(&p.vector)
                .map(|(y, x)| (y - p.value * x).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(
                (r - p.residual_estimate).abs() < 1e-8,
                "{r} vs {}",
                p.residual_estimate
            );
        }
    }
}
