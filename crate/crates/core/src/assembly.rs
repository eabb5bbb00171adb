//! Lowest-order Raviart-Thomas element matrices and global assembly.
//!
//! On a triangle `T` with vertices `p₀, p₁, p₂`, the basis function attached
//! to the edge `eᵢ` opposite `pᵢ` is `φᵢ(x) = sᵢ |eᵢ| / (2|T|) · (x − pᵢ)`,
//! where `sᵢ = ±1` aligns the local outward normal with the global edge
//! normal. Its divergence is the constant `sᵢ |eᵢ| / |T|`.
//!
//! The assembled matrices are
//! `M = ∫ρ φᵢ·φⱼ`, `K₁ = 2∫ν div φᵢ div φⱼ` and `K₂ = ∫ρc² div φᵢ div φⱼ`
//! over interior edges only, which imposes `u·n = 0` on the cavity walls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{Mesh, Subdomain};

/// Relative area floor below which a triangle is rejected as degenerate.
const DEGENERATE_AREA_FLOOR: f64 = 1e-14;

/// Constant physical data of one fluid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidProperties {
    /// Density ρ in kg/m³.
    pub density: f64,
    /// Sound speed c in m/s.
    pub sound_speed: f64,
    /// Viscosity ν in N·s/m².
    pub viscosity: f64,
}

impl FluidProperties {
    pub const fn new(density: f64, sound_speed: f64, viscosity: f64) -> Self {
        Self {
            density,
            sound_speed,
            viscosity,
        }
    }

    pub const fn water(viscosity: f64) -> Self {
        Self::new(1000.0, 1430.0, viscosity)
    }

    pub const fn air(viscosity: f64) -> Self {
        Self::new(1.0, 340.0, viscosity)
    }

    /// ρc², the bulk modulus.
    pub fn bulk_modulus(&self) -> f64 {
        self.density * self.sound_speed * self.sound_speed
    }

    pub fn with_viscosity(self, viscosity: f64) -> Self {
        Self { viscosity, ..self }
    }

    fn validate(&self, subdomain: usize) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidMaterial { subdomain, reason });
        if !(self.density.is_finite() && self.density > 0.0) {
            return bad(format!("density must be positive, got {}", self.density));
        }
        if !(self.sound_speed.is_finite() && self.sound_speed > 0.0) {
            return bad(format!(
                "sound speed must be positive, got {}",
                self.sound_speed
            ));
        }
        if !(self.viscosity.is_finite() && self.viscosity >= 0.0) {
            return bad(format!(
                "viscosity must be nonnegative, got {}",
                self.viscosity
            ));
        }
        Ok(())
    }
}

/// Fluids below (`lower`, subdomain 1) and above (`upper`, subdomain 2) the interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub lower: FluidProperties,
    pub upper: FluidProperties,
}

impl MaterialConfig {
    pub fn new(lower: FluidProperties, upper: FluidProperties) -> Result<Self> {
        let m = Self { lower, upper };
        m.validate()?;
        Ok(m)
    }

    /// Water below air, with the given viscosities.
    pub fn water_air(lower_viscosity: f64, upper_viscosity: f64) -> Self {
        Self {
            lower: FluidProperties::water(lower_viscosity),
            upper: FluidProperties::air(upper_viscosity),
        }
    }

    /// The same fluid on both sides of the interface.
    pub fn homogeneous(fluid: FluidProperties) -> Self {
        Self {
            lower: fluid,
            upper: fluid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lower.validate(1)?;
        self.upper.validate(2)
    }

    pub fn fluid(&self, subdomain: Subdomain) -> &FluidProperties {
        match subdomain {
            Subdomain::Lower => &self.lower,
            Subdomain::Upper => &self.upper,
        }
    }

    pub fn fluids(&self) -> [FluidProperties; 2] {
        [self.lower, self.upper]
    }

    pub fn is_inviscid(&self) -> bool {
        self.lower.viscosity == 0.0 && self.upper.viscosity == 0.0
    }

    pub fn inviscid(&self) -> Self {
        Self {
            lower: self.lower.with_viscosity(0.0),
            upper: self.upper.with_viscosity(0.0),
        }
    }
}

/// Local 3×3 matrices of one triangle, indexed by local edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMatrices {
    pub mass: [[f64; 3]; 3],
    pub viscous: [[f64; 3]; 3],
    pub stiffness: [[f64; 3]; 3],
}

pub(crate) fn signed_area(p: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

/// Length of the edge opposite local vertex `i`.
pub(crate) fn opposite_edge_length(p: &[[f64; 2]; 3], i: usize) -> f64 {
    let a = p[(i + 1) % 3];
    let b = p[(i + 2) % 3];
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Constant divergences `sᵢ|eᵢ|/|T|` of the three basis functions.
pub fn basis_divergences(p: &[[f64; 2]; 3], signs: [f64; 3]) -> Result<[f64; 3]> {
    let area = checked_area(p)?;
    Ok([0, 1, 2].map(|i| signs[i] * opposite_edge_length(p, i) / area))
}

fn checked_area(p: &[[f64; 2]; 3]) -> Result<f64> {
    let area = signed_area(p);
    let longest = (0..3)
        .map(|i| opposite_edge_length(p, i))
        .fold(0.0, f64::max);
    if !(area > 0.0) || area < DEGENERATE_AREA_FLOOR * longest * longest {
        return Err(Error::DegenerateTriangle { area });
    }
    Ok(area)
}

/// Element mass, viscous and stiffness matrices of one counterclockwise
/// triangle. The mass matrix uses the edge-midpoint rule, which is exact
/// for the quadratic integrand.
pub fn rt0_element_matrices(
    p: &[[f64; 2]; 3],
    signs: [f64; 3],
    fluid: &FluidProperties,
) -> Result<ElementMatrices> {
    let area = checked_area(p)?;
    let scale: [f64; 3] = [0, 1, 2].map(|i| signs[i] * opposite_edge_length(p, i) / (2.0 * area));
    let div = scale.map(|s| 2.0 * s);
    let midpoints: [[f64; 2]; 3] = [0, 1, 2].map(|i| {
        let a = p[(i + 1) % 3];
        let b = p[(i + 2) % 3];
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    });

    let mut out = ElementMatrices {
        mass: [[0.0; 3]; 3],
        viscous: [[0.0; 3]; 3],
        stiffness: [[0.0; 3]; 3],
    };
    let mass_w = fluid.density * area / 3.0;
    let visc_w = 2.0 * fluid.viscosity * area;
    let stiff_w = fluid.bulk_modulus() * area;
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for m in &midpoints {
                let di = [m[0] - p[i][0], m[1] - p[i][1]];
                let dj = [m[0] - p[j][0], m[1] - p[j][1]];
                s += di[0] * dj[0] + di[1] * dj[1];
            }
            out.mass[i][j] = mass_w * (scale[i] * scale[j]) * s;
            let dd = div[i] * div[j];
            out.viscous[i][j] = visc_w * dd;
            out.stiffness[i][j] = stiff_w * dd;
        }
    }
    Ok(out)
}

/// `M`, `K₁`, `K₂` over interior-edge DOFs, sharing one sparsity pattern.
#[derive(Debug, Clone)]
pub struct GlobalMatrices {
    pub mass: CsrMatrix<f64>,
    pub viscous: CsrMatrix<f64>,
    pub stiffness: CsrMatrix<f64>,
}

impl GlobalMatrices {
    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }
}

pub fn assemble_global(mesh: &Mesh, materials: &MaterialConfig) -> Result<GlobalMatrices> {
    materials.validate()?;
    let n = mesh.num_dofs();
    let cap = 9 * mesh.triangles.len();
    let mut tm = Vec::with_capacity(cap);
    let mut tk1 = Vec::with_capacity(cap);
    let mut tk2 = Vec::with_capacity(cap);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let coords = mesh.triangle_coords(t);
        let em = rt0_element_matrices(
            &coords,
            mesh.triangle_signs(t),
            materials.fluid(tri.subdomain),
        )?;
        let dofs = mesh.edge_of_triangle[t].map(|l| mesh.dof_of_edge[l.edge]);
        for i in 0..3 {
            let Some(r) = dofs[i] else { continue };
            for j in 0..3 {
                let Some(c) = dofs[j] else { continue };
                tm.push((r, c, em.mass[i][j]));
                tk1.push((r, c, em.viscous[i][j]));
                tk2.push((r, c, em.stiffness[i][j]));
            }
        }
    }
    Ok(GlobalMatrices {
        mass: CsrMatrix::from_triplets(n, n, tm)?,
        viscous: CsrMatrix::from_triplets(n, n, tk1)?,
        stiffness: CsrMatrix::from_triplets(n, n, tk2)?,
    })
}
