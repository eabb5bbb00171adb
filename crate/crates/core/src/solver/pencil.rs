use num_complex::Complex64;

use crate::assembly::{assemble_global, MaterialConfig};
use crate::error::{Error, Result};
use crate::linalg::{factor_complex, factor_spd, norm2, CsrMatrix, Factorization};
use crate::mesh::Mesh;

/// `Q(λ) = λ²M + λK₁ + K₂` on interior-edge DOFs.
#[derive(Debug, Clone)]
pub struct QuadraticPencil {
    pub mass: CsrMatrix<f64>,
    pub viscous: CsrMatrix<f64>,
    pub stiffness: CsrMatrix<f64>,
    pub materials: MaterialConfig,
    /// Mesh refinement the matrices came from, if any.
    pub refinement: Option<usize>,
    norms: [f64; 3],
}

impl QuadraticPencil {
    /// Checks the shared pattern, that `M` admits a Cholesky-type
    /// factorization and that `K₁` vanishes exactly for inviscid fluids.
    pub fn new(
        mass: CsrMatrix<f64>,
        viscous: CsrMatrix<f64>,
        stiffness: CsrMatrix<f64>,
        materials: MaterialConfig,
    ) -> Result<Self> {
        materials.validate()?;
        let n = mass.nrows();
        for m in [&mass, &viscous, &stiffness] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: m.ncols(),
                });
            }
        }
        if !mass.same_pattern(&viscous) || !mass.same_pattern(&stiffness) {
            return Err(Error::DimensionMismatch {
                expected: mass.nnz(),
                actual: stiffness.nnz(),
            });
        }
        factor_spd(&mass)?;
        let k1_zero = viscous.values().iter().all(|&v| v == 0.0);
        if k1_zero != materials.is_inviscid() && n > 0 {
            return Err(Error::InvalidSolverParameters(
                "viscous matrix must vanish exactly when both viscosities are zero".into(),
            ));
        }
        let norms = [mass.norm_one(), viscous.norm_one(), stiffness.norm_one()];
        Ok(Self {
            mass,
            viscous,
            stiffness,
            materials,
            refinement: None,
            norms,
        })
    }

    pub fn from_mesh(mesh: &Mesh, materials: &MaterialConfig) -> Result<Self> {
        let g = assemble_global(mesh, materials)?;
        let mut p = Self::new(g.mass, g.viscous, g.stiffness, *materials)?;
        p.refinement = Some(mesh.refinement);
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    /// `‖M‖₁, ‖K₁‖₁, ‖K₂‖₁`.
    pub fn norms(&self) -> [f64; 3] {
        self.norms
    }

    pub fn evaluate(&self, lambda: Complex64) -> Result<CsrMatrix<Complex64>> {
        CsrMatrix::complex_combination(&[
            (lambda * lambda, &self.mass),
            (lambda, &self.viscous),
            (Complex64::new(1.0, 0.0), &self.stiffness),
        ])
    }

    /// `Q(λ) u`.
    pub fn apply(&self, lambda: Complex64, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let mu = self.mass.spmv(u)?;
        let k1u = self.viscous.spmv(u)?;
        let k2u = self.stiffness.spmv(u)?;
        let l2 = lambda * lambda;
        Ok(mu
            .iter()
            .zip(&k1u)
            .zip(&k2u)
            .map(|((m, k1), k2)| l2 * m + lambda * k1 + k2)
            .collect())
    }

    /// Backward error `‖Q(λ)u‖ / ((|λ|²‖M‖₁ + |λ|‖K₁‖₁ + ‖K₂‖₁)‖u‖)`.
    pub fn relative_residual(&self, lambda: Complex64, u: &[Complex64]) -> Result<f64> {
        let un = norm2(u);
        if un == 0.0 {
            return Err(Error::ZeroVector);
        }
        let r = norm2(&self.apply(lambda, u)?);
        let a = lambda.norm();
        let [m, k1, k2] = self.norms;
        Ok(r / ((a * a * m + a * k1 + k2) * un))
    }
}

/// `(A − σB)⁻¹B` for the linearization
/// `A = [[−K₁, −K₂], [M, 0]]`, `B = diag(M, M)` acting on `(u; w)` with `w = u/λ`.
///
/// With `x = (x₁; x₂)` the block solve reduces to one solve with
/// `Q(σ) = σ²M + σK₁ + K₂`: `w = −Q(σ)⁻¹(Mx₁ + (K₁ + σM)x₂)` and `y = (σw + x₂; w)`.
#[derive(Debug)]
pub struct ShiftInvert<'a> {
    pencil: &'a QuadraticPencil,
    shift: Complex64,
    factor: Factorization<Complex64>,
}

impl<'a> ShiftInvert<'a> {
    pub fn new(pencil: &'a QuadraticPencil, shift: Complex64) -> Result<Self> {
        let q = pencil.evaluate(shift)?;
        let factor = factor_complex(&q).map_err(|e| match e {
            Error::SingularMatrix { .. } => Error::SingularPencil { shift },
            other => other,
        })?;
        Ok(Self {
            pencil,
            shift,
            factor,
        })
    }

    pub fn shift(&self) -> Complex64 {
        self.shift
    }

    /// Dimension of the linearized problem, `2n`.
    pub fn dim(&self) -> usize {
        2 * self.pencil.dim()
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) -> Result<()> {
        let n = self.pencil.dim();
        if x.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                actual: x.len(),
            });
        }
        if y.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                actual: y.len(),
            });
        }
        let (x1, x2) = x.split_at(n);
        let p = self.pencil;
        let mx1 = p.mass.spmv(x1)?;
        let k1x2 = p.viscous.spmv(x2)?;
        let mx2 = p.mass.spmv(x2)?;
        let rhs: Vec<Complex64> = mx1
            .iter()
            .zip(&k1x2)
            .zip(&mx2)
            .map(|((a, b), c)| a + b + self.shift * c)
            .collect();
        let w = self.factor.solve(&rhs)?;
        let (y1, y2) = y.split_at_mut(n);
        for i in 0..n {
            let wi = -w[i];
            y2[i] = wi;
            y1[i] = self.shift * wi + x2[i];
        }
        Ok(())
    }
}
