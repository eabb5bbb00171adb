//! Separation-of-variables solution of the two-fluid rectangular cavity.
//!
//! With `p̂ᵢ = cos(mπx/A)·Yᵢ(y)` the interface conditions reduce to the scalar
//! dispersion relation `f_m(λ) = 0`, whose roots are the exact eigenvalues.

pub mod contour;
pub mod roots;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::{FluidProperties, MaterialConfig};
use crate::error::{Error, Result};
use crate::mesh::{GeometryConfig, Subdomain};

pub use contour::{contour_grid, ContourGrid};
pub use roots::{find_roots, nelder_mead, Root, RootSearch, SearchBox};

/// Combined exponent `|Re(r₁H)| + |Re(r₂(H−B))|` beyond which the plain form
/// risks overflow and the tanh-normalized form is used instead.
pub const SCALED_FORM_THRESHOLD: f64 = 30.0;
/// A cosh factor below this magnitude makes the scaled form unreliable.
pub const COSH_ZERO_TOL: f64 = 1e-10;
/// Relative floor for `ρc² + 2νλ`.
const DENOMINATOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionForm {
    /// `(r₁/ρ₁)sinh(r₁H)cosh(r₂(H−B)) − (r₂/ρ₂)sinh(r₂(H−B))cosh(r₁H)`.
    Plain,
    /// The plain form divided by `cosh(r₁H)cosh(r₂(H−B))`.
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionValue {
    pub value: Complex64,
    pub form: DispersionForm,
    /// One of the cosh factors nearly vanishes, so zeros of the scaled form
    /// may not be zeros of the plain one.
    pub near_cosh_zero: bool,
}

/// Dispersion relation for one horizontal mode index `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionProblem {
    pub m: usize,
    pub geometry: GeometryConfig,
    pub materials: MaterialConfig,
}

impl DispersionProblem {
    pub fn new(m: usize, geometry: GeometryConfig, materials: MaterialConfig) -> Result<Self> {
        geometry.validate()?;
        materials.validate()?;
        Ok(Self {
            m,
            geometry,
            materials,
        })
    }

    /// Principal square root of `λ²ρ/(ρc² + 2νλ) + m²π²/A²` for one subdomain.
    pub fn r_m(&self, subdomain: Subdomain, lambda: Complex64) -> Result<Complex64> {
        let f = self.materials.fluid(subdomain);
        let k = f.bulk_modulus();
        let denom = k + 2.0 * f.viscosity * lambda;
        if denom.norm() < DENOMINATOR_TOL * k {
            return Err(Error::DegenerateDenominator {
                subdomain: subdomain.tag() as usize,
                lambda,
            });
        }
        let kx = self.m as f64 * PI / self.geometry.width;
        Ok((lambda * lambda * f.density / denom + kx * kx).sqrt())
    }

    /// Both wavenumbers `(r₁, r₂)`.
    pub fn wavenumbers(&self, lambda: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((
            self.r_m(Subdomain::Lower, lambda)?,
            self.r_m(Subdomain::Upper, lambda)?,
        ))
    }

    /// `f_m(λ)` in whichever form is safe at `λ`.
    pub fn evaluate(&self, lambda: Complex64) -> Result<DispersionValue> {
        let (r1, r2) = self.wavenumbers(lambda)?;
        let form = self.natural_form(r1, r2);
        Ok(self.from_wavenumbers(r1, r2, form))
    }

    /// `f_m(λ)` in a prescribed form.
    pub fn evaluate_in(&self, lambda: Complex64, form: DispersionForm) -> Result<DispersionValue> {
        let (r1, r2) = self.wavenumbers(lambda)?;
        Ok(self.from_wavenumbers(r1, r2, form))
    }

    pub fn f_m(&self, lambda: Complex64) -> Result<Complex64> {
        Ok(self.evaluate(lambda)?.value)
    }

    /// The form [`evaluate`](Self::evaluate) would pick at `λ`.
    pub fn form_at(&self, lambda: Complex64) -> Result<DispersionForm> {
        let (r1, r2) = self.wavenumbers(lambda)?;
        Ok(self.natural_form(r1, r2))
    }

    fn lengths(&self) -> (f64, f64) {
        (
            self.geometry.interface,
            self.geometry.interface - self.geometry.height,
        )
    }

    fn natural_form(&self, r1: Complex64, r2: Complex64) -> DispersionForm {
        let (h1, h2) = self.lengths();
        if (r1 * h1).re.abs() + (r2 * h2).re.abs() > SCALED_FORM_THRESHOLD {
            DispersionForm::Scaled
        } else {
            DispersionForm::Plain
        }
    }

    /// Evaluates with explicit wavenumbers; any square-root branch gives the
    /// same value because `r·sinh(r·)` and `cosh(r·)` are even in `r`.
    pub fn from_wavenumbers(
        &self,
        r1: Complex64,
        r2: Complex64,
        form: DispersionForm,
    ) -> DispersionValue {
        let (h1, h2) = self.lengths();
        let [lower, upper] = self.materials.fluids();
        let (a, b) = (r1 * h1, r2 * h2);
        let (c1, c2) = (a.cosh(), b.cosh());
        let value = match form {
            DispersionForm::Plain => {
                r1 / lower.density * a.sinh() * c2 - r2 / upper.density * b.sinh() * c1
            }
            DispersionForm::Scaled => r1 / lower.density * a.tanh() - r2 / upper.density * b.tanh(),
        };
        // cosh of a large argument cannot vanish; only test where it is representable.
        let small = |z: Complex64, c: Complex64| z.re.abs() < 700.0 && c.norm() < COSH_ZERO_TOL;
        DispersionValue {
            value,
            form,
            near_cosh_zero: small(a, c1) || small(b, c2),
        }
    }
}

/// The two roots `λ± = (−νω² ± sqrt(ν²ω⁴ − ρ²c⁴ω²))/(ρc²)` of a single
/// fluid whose inviscid frequency is `ω`.
pub fn homogeneous_lambda(fluid: &FluidProperties, omega: f64) -> (Complex64, Complex64) {
    let k = fluid.bulk_modulus();
    let nu = fluid.viscosity;
    let w2 = omega * omega;
    let disc = Complex64::new(nu * nu * w2 * w2 - k * k * w2, 0.0).sqrt();
    let base = Complex64::new(-nu * w2, 0.0);
    ((base + disc) / k, (base - disc) / k)
}

/// Lowest `count` Neumann frequencies `cπ·sqrt((m/A)² + (n/B)²)` of a
/// single fluid filling the rectangle, excluding the constant mode.
pub fn inviscid_rectangle_modes(
    geometry: &GeometryConfig,
    sound_speed: f64,
    count: usize,
) -> Vec<f64> {
    let (a, b) = (geometry.width, geometry.height);
    let mut modes = Vec::with_capacity((count + 1) * (count + 1));
    for m in 0..=count {
        for n in 0..=count {
            if m + n > 0 {
                let (x, y) = (m as f64 / a, n as f64 / b);
                modes.push(sound_speed * PI * (x * x + y * y).sqrt());
            }
        }
    }
    modes.sort_by(f64::total_cmp);
    modes.truncate(count);
    modes
}

/// Highest mode index scanned by [`lowest_inviscid_frequency`].
const FREQUENCY_SCAN_MODES: usize = 8;
const FREQUENCY_SCAN_STEPS: usize = 20_000;

/// Smallest positive `ω` with `f_m(iω) = 0` for the inviscid version of the
/// materials, over `m = 0..=8`. On the imaginary axis the inviscid `f_m` is
/// real, so roots are bracketed by sign changes and refined by bisection. The
/// plain form is used because the poles of tanh would add spurious crossings.
pub fn lowest_inviscid_frequency(
    geometry: &GeometryConfig,
    materials: &MaterialConfig,
) -> Result<f64> {
    let materials = materials.inviscid();
    let c_max = materials
        .fluids()
        .iter()
        .map(|f| f.sound_speed)
        .fold(0.0, f64::max);
    let shortest = geometry
        .width
        .min(geometry.interface)
        .min(geometry.height - geometry.interface);
    let upper = 4.0 * PI * c_max / shortest;
    let step = upper / FREQUENCY_SCAN_STEPS as f64;

    let mut best: Option<f64> = None;
    for m in 0..=FREQUENCY_SCAN_MODES {
        let p = DispersionProblem::new(m, *geometry, materials)?;
        let g = |w: f64| -> Result<f64> {
            Ok(
                p.evaluate_in(Complex64::new(0.0, w), DispersionForm::Plain)?
                    .value
                    .re,
            )
        };
        let limit = best.unwrap_or(upper);
        let (mut lo, mut g_lo) = (step, g(step)?);
        while lo < limit {
            let hi = lo + step;
            let g_hi = g(hi)?;
            if g_lo == 0.0 || g_lo.signum() != g_hi.signum() {
                let (mut a, mut b, mut ga) = (lo, hi, g_lo);
                for _ in 0..100 {
                    let mid = 0.5 * (a + b);
                    let gm = g(mid)?;
                    if gm.signum() == ga.signum() && gm != 0.0 {
                        a = mid;
                        ga = gm;
                    } else {
                        b = mid;
                    }
                }
                let root = 0.5 * (a + b);
                if best.is_none_or(|w| root < w) {
                    best = Some(root);
                }
                break;
            }
            lo = hi;
            g_lo = g_hi;
        }
    }
    best.ok_or_else(|| Error::InvalidSearch(format!("no inviscid root below {upper:.3e} rad/s")))
}
