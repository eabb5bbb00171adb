//! Essential spectrum of the viscous pencil and filtering of spurious modes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::pencil::QuadraticPencil;
use super::qep::EigenPair;
use crate::assembly::MaterialConfig;
use crate::error::{Error, Result};
use crate::linalg::dot;

/// Relative stiffness quotient below which a mode counts as zero-frequency.
pub const ZERO_MODE_TOL: f64 = 1e-7;

/// Interval `[μ_min, μ_max]` of `μ = 1/λ` values built from the viscous
/// ratios `2ν/(ρc²)` of the fluids. Discrete eigenvalues of a viscous mesh
/// problem accumulate on the corresponding negative real `λ` segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBand {
    pub mu_min: f64,
    pub mu_max: f64,
}

impl SpectralBand {
    /// `[1/μ_max, 1/μ_min]`, the magnitudes of the band in the λ-plane.
    /// Unbounded above when `μ_min = 0`.
    pub fn lambda_magnitudes(&self) -> (f64, f64) {
        let hi = if self.mu_min > 0.0 {
            1.0 / self.mu_min
        } else {
            f64::INFINITY
        };
        (1.0 / self.mu_max, hi)
    }

    /// Whether `λ` lies on the negative real band, up to `tol_imag·|λ|`
    /// in its imaginary part.
    pub fn contains(&self, lambda: Complex64, tol_imag: f64) -> bool {
        if lambda.im.abs() > tol_imag * lambda.norm() || lambda.re >= 0.0 {
            return false;
        }
        let (lo, hi) = self.lambda_magnitudes();
        let mag = lambda.norm();
        mag >= lo * (1.0 - tol_imag) && mag <= hi * (1.0 + tol_imag)
    }
}

/// The band for the given materials, or `None` when both fluids are inviscid
/// (the band then degenerates to the origin of the `μ`-plane).
pub fn essential_band(materials: &MaterialConfig) -> Option<SpectralBand> {
    let ratios = materials
        .fluids()
        .map(|f| 2.0 * f.viscosity / f.bulk_modulus());
    if ratios.iter().all(|&r| r == 0.0) {
        return None;
    }
    let nu_max = materials
        .fluids()
        .iter()
        .map(|f| f.viscosity)
        .fold(0.0, f64::max);
    let nu_min = materials
        .fluids()
        .iter()
        .map(|f| f.viscosity)
        .fold(f64::INFINITY, f64::min);
    let k_max = materials
        .fluids()
        .iter()
        .map(|f| f.bulk_modulus())
        .fold(0.0, f64::max);
    let k_min = materials
        .fluids()
        .iter()
        .map(|f| f.bulk_modulus())
        .fold(f64::INFINITY, f64::min);
    Some(SpectralBand {
        mu_min: 2.0 * nu_min / k_max,
        mu_max: 2.0 * nu_max / k_min,
    })
}

#[derive(Debug, Clone, Default)]
pub struct FilteredPairs {
    pub kept: Vec<EigenPair>,
    pub discarded: Vec<EigenPair>,
    /// Kept eigenvalues that are nearly real but outside the band.
    pub warnings: Vec<String>,
}

/// `|xᴴK₂x| / |xᴴMx|`, scaled by `‖M‖₁/‖K₂‖₁`. Of order `|λ|²/ω_max²` for
/// a physical mode and at rounding level for a divergence-free field.
pub fn stiffness_quotient(pencil: &QuadraticPencil, x: &[Complex64]) -> Result<f64> {
    let mx = dot(x, &pencil.mass.spmv(x)?).norm();
    if mx == 0.0 {
        return Err(Error::ZeroVector);
    }
    let kx = dot(x, &pencil.stiffness.spmv(x)?).norm();
    let [m, _, k] = pencil.norms();
    Ok(if k == 0.0 { 0.0 } else { kx / mx * m / k })
}

/// Whether the pair is one of the `λ = 0` modes spanned by discretely
/// divergence-free fields. They carry no pressure, and because the zero
/// eigenvalue is defective their computed `λ` can sit well off the origin.
pub fn is_zero_frequency(pencil: &QuadraticPencil, pair: &EigenPair) -> Result<bool> {
    Ok(stiffness_quotient(pencil, &pair.vector)? <= ZERO_MODE_TOL)
}

/// Splits pairs into physical modes and spurious ones: those on the
/// essential band, and those flagged by `zero_mode`.
pub fn filter_spurious(
    pairs: Vec<EigenPair>,
    band: Option<&SpectralBand>,
    tol_imag: f64,
    zero_mode: impl Fn(&EigenPair) -> bool,
) -> FilteredPairs {
    let mut out = FilteredPairs::default();
    for pair in pairs {
        let on_band = band.is_some_and(|b| b.contains(pair.lambda, tol_imag));
        if on_band || zero_mode(&pair) {
            out.discarded.push(pair);
            continue;
        }
        if pair.lambda.norm() > 0.0 && pair.lambda.im.abs() <= tol_imag * pair.lambda.norm() {
            out.warnings.push(format!(
                "eigenvalue {:.6e}{:+.6e}i is nearly real but outside the essential band",
                pair.lambda.re, pair.lambda.im
            ));
        }
        out.kept.push(pair);
    }
    out
}
