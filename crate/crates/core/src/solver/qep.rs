use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pencil::{QuadraticPencil, ShiftInvert};
use crate::error::{Error, Result};
use crate::linalg::{norm2, KrylovSchur};

/// Largest Krylov dimension accepted (dense Schur work grows cubically).
pub const MAX_KRYLOV_DIM: usize = 200;
/// Relative perturbation applied to a shift that hits the spectrum.
const SHIFT_PERTURBATION: f64 = 1e-3;
const SHIFT_RETRIES: usize = 3;
/// Imaginary-to-modulus ratio above which an inviscid eigenvalue is flagged.
pub const INVISCID_REAL_PART_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub shift: Complex64,
    pub nev: usize,
    pub krylov_dim: usize,
    /// Relative quadratic residual below which a pair counts as converged.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl SolveOptions {
    pub fn new(shift: Complex64, nev: usize) -> Self {
        Self {
            shift,
            nev,
            krylov_dim: (3 * nev + 10).min(MAX_KRYLOV_DIM),
            tol: 1e-10,
            max_restarts: 5,
            seed: 1,
        }
    }

    pub fn with_krylov_dim(mut self, k: usize) -> Self {
        self.krylov_dim = k;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSolverParameters(m));
        if self.nev == 0 {
            return bad("nev must be positive".into());
        }
        if self.krylov_dim <= self.nev || self.krylov_dim > MAX_KRYLOV_DIM {
            return bad(format!(
                "krylov_dim must satisfy nev < krylov_dim <= {MAX_KRYLOV_DIM}, got nev = {}, krylov_dim = {}",
                self.nev, self.krylov_dim
            ));
        }
        if self.krylov_dim > 2 * dim {
            return bad(format!(
                "krylov_dim {} exceeds the linearized dimension {}",
                self.krylov_dim,
                2 * dim
            ));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tol must lie in (0, 1), got {}", self.tol));
        }
        if !(self.shift.re.is_finite() && self.shift.im.is_finite()) {
            return bad("shift must be finite".into());
        }
        Ok(())
    }
}

/// Which half of the linearized eigenvector `(u; u/λ)` supplied the mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenBlock {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: Complex64,
    /// Unit-norm coefficients over interior-edge DOFs.
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub converged: bool,
    pub block: EigenBlock,
}

/// Outcome of a QEP solve: the pairs nearest the shift actually used.
#[derive(Debug, Clone)]
pub struct QepSolution {
    pub pairs: Vec<EigenPair>,
    pub shift: Complex64,
    pub restarts: usize,
    pub operator_applications: usize,
}

fn perturbed_shifts(shift: Complex64) -> impl Iterator<Item = Complex64> {
    let step = SHIFT_PERTURBATION * shift.norm().max(1.0);
    (0..=SHIFT_RETRIES).map(move |k| {
        if k == 0 {
            shift
        } else {
            // Off the imaginary axis and along it, so a real-symmetric spectrum is missed.
            shift + Complex64::new(0.5, 1.0) * (step * k as f64)
        }
    })
}

/// Eigenpairs of `(λ²M + λK₁ + K₂)u = 0` nearest `options.shift`, found by
/// Krylov-Schur on the shift-inverted linearization.
pub fn solve_qep(pencil: &QuadraticPencil, options: &SolveOptions) -> Result<QepSolution> {
    let n = pencil.dim();
    options.validate(n)?;

    let mut last_err = None;
    let mut op_and_shift = None;
    for sigma in perturbed_shifts(options.shift) {
        match ShiftInvert::new(pencil, sigma) {
            Ok(op) => {
                op_and_shift = Some((op, sigma));
                break;
            }
            Err(e @ Error::SingularPencil { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let Some((op, sigma)) = op_and_shift else {
        return Err(last_err.unwrap_or(Error::SingularPencil {
            shift: options.shift,
        }));
    };

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let start: Vec<Complex64> = (0..2 * n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();

    let mut applications = 0usize;
    let mut apply = |x: &[Complex64], y: &mut [Complex64]| {
        applications += 1;
        op.apply(x, y)
    };
    let mut ks = KrylovSchur::new(&mut apply, &start, options.krylov_dim)?;
    let keep = (2 * options.nev)
        .min(options.krylov_dim - 1)
        .max(options.nev);

    let mut restarts = 0;
    let pairs = loop {
        let ritz = ks.ritz_pairs(options.nev)?;
        let mut pairs = Vec::with_capacity(ritz.len());
        for r in &ritz {
            if r.value.norm() == 0.0 {
                continue;
            }
            let lambda = sigma + 1.0 / r.value;
            pairs.push(extract_mode(pencil, lambda, &r.vector, options.tol)?);
        }
        let done =
            pairs.len() >= options.nev.min(ks.state().dim) && pairs.iter().all(|p| p.converged);
        if done || ks.converged_invariant_subspace() || restarts >= options.max_restarts {
            break pairs;
        }
        ks.restart(&mut apply, keep)?;
        restarts += 1;
    };

    if !pairs.iter().any(|p| p.converged) {
        let best = pairs
            .iter()
            .map(|p| p.residual)
            .fold(f64::INFINITY, f64::min);
        return Err(Error::NoConvergedPairs {
            best_residual: best,
        });
    }
    Ok(QepSolution {
        pairs,
        shift: sigma,
        restarts,
        operator_applications: applications,
    })
}

/// Picks the block of `(u; u/λ)` with the smaller quadratic residual and
/// normalizes it to unit norm with its largest entry real and positive.
fn extract_mode(
    pencil: &QuadraticPencil,
    lambda: Complex64,
    y: &[Complex64],
    tol: f64,
) -> Result<EigenPair> {
    let n = pencil.dim();
    let (upper, lower) = y.split_at(n);
    let mut best: Option<(f64, EigenBlock, &[Complex64])> = None;
    for (block, u) in [(EigenBlock::Upper, upper), (EigenBlock::Lower, lower)] {
        if norm2(u) == 0.0 {
            continue;
        }
        let r = pencil.relative_residual(lambda, u)?;
        if best.is_none_or(|(br, _, _)| r < br) {
            best = Some((r, block, u));
        }
    }
    let (residual, block, u) = best.ok_or(Error::ZeroVector)?;
    Ok(EigenPair {
        lambda,
        vector: normalize_phase(u),
        residual,
        converged: residual <= tol,
        block,
    })
}

fn normalize_phase(u: &[Complex64]) -> Vec<Complex64> {
    let norm = norm2(u);
    let pivot = u
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or_default();
    let phase = if pivot.norm() > 0.0 {
        pivot.conj() / pivot.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    u.iter().map(|z| z * phase / norm).collect()
}

/// Runtime checks on one eigenpair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residual: f64,
    /// `Re λ ≥ 0` for a nonzero eigenvalue of a dissipative problem.
    pub decay_violation: bool,
    /// `|Re λ| > 1e-6|λ|` when both fluids are inviscid.
    pub inviscid_real_part_violation: bool,
}

pub fn check_eigenpair(pencil: &QuadraticPencil, pair: &EigenPair) -> Result<ResidualReport> {
    if norm2(&pair.vector) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let residual = pencil.relative_residual(pair.lambda, &pair.vector)?;
    let inviscid = pencil.materials.is_inviscid();
    let lambda = pair.lambda;
    Ok(ResidualReport {
        residual,
        decay_violation: !inviscid && lambda.norm() > 0.0 && lambda.re >= 0.0,
        inviscid_real_part_violation: inviscid
            && lambda.re.abs() > INVISCID_REAL_PART_TOL * lambda.norm(),
    })
}
