//! Report structures and file writers.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::basis_divergences;
use crate::config::{ComplexValue, RunConfig};
use crate::error::{Error, Result};
use crate::mesh::{edge_normal, Mesh};
use crate::solver::{EigenPair, ResidualReport, SpectralBand};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub residual: f64,
    pub converged: bool,
    /// `Re λ ≥ 0` in a dissipative run.
    pub decay_violation: bool,
    /// `|Re λ| > 1e-6|λ|` in an inviscid run.
    pub inviscid_real_part_violation: bool,
}

impl PairRecord {
    pub fn new(pair: &EigenPair, report: &ResidualReport) -> Self {
        Self {
            lambda_re: pair.lambda.re,
            lambda_im: pair.lambda.im,
            residual: report.residual,
            converged: pair.converged,
            decay_violation: report.decay_violation,
            inviscid_real_part_violation: report.inviscid_real_part_violation,
        }
    }

    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda_re, self.lambda_im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRecord {
    /// `μ = 1/λ` interval in seconds.
    pub mu_min: f64,
    pub mu_max: f64,
    /// `|λ|` interval in 1/s; the upper end is absent when unbounded.
    pub lambda_min: f64,
    pub lambda_max: Option<f64>,
}

impl From<&SpectralBand> for BandRecord {
    fn from(b: &SpectralBand) -> Self {
        let (lo, hi) = b.lambda_magnitudes();
        Self {
            mu_min: b.mu_min,
            mu_max: b.mu_max,
            lambda_min: lo,
            lambda_max: hi.is_finite().then_some(hi),
        }
    }
}

/// Wall-clock seconds; the only nondeterministic part of a report.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub mesh_and_assembly_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub config: RunConfig,
    pub refinement: usize,
    pub dofs: usize,
    /// Shift actually used (after any perturbation off the spectrum).
    pub shift: ComplexValue,
    pub restarts: usize,
    pub operator_applications: usize,
    /// Kept pairs, sorted by `|Im λ|`.
    pub pairs: Vec<PairRecord>,
    /// Pairs on the essential band.
    pub discarded: Vec<PairRecord>,
    pub warnings: Vec<String>,
    pub band: Option<BandRecord>,
    pub timings: Timings,
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn check_length(mesh: &Mesh, vector: &[Complex64]) -> Result<()> {
    if vector.len() != mesh.num_dofs() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_dofs(),
            actual: vector.len(),
        });
    }
    Ok(())
}

/// One row per interior edge:
/// `edge_index,midpoint_x,midpoint_y,normal_x,normal_y,coeff_re,coeff_im`.
pub fn write_eigenvector_csv<W: Write>(
    mesh: &Mesh,
    vector: &[Complex64],
    mut out: W,
) -> Result<()> {
    check_length(mesh, vector)?;
    writeln!(
        out,
        "edge_index,midpoint_x,midpoint_y,normal_x,normal_y,coeff_re,coeff_im"
    )?;
    for (&e, c) in mesh.edge_of_dof.iter().zip(vector) {
        let m = mesh.edge_midpoint(e);
        let n = edge_normal(&mesh.vertices, &mesh.edges[e]);
        writeln!(
            out,
            "{e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            m[0], m[1], n[0], n[1], c.re, c.im
        )?;
    }
    Ok(())
}

/// The (piecewise constant) divergence of the discrete field on each triangle.
pub fn divergence_per_triangle(mesh: &Mesh, vector: &[Complex64]) -> Result<Vec<Complex64>> {
    check_length(mesh, vector)?;
    (0..mesh.triangles.len())
        .map(|t| {
            let div = basis_divergences(&mesh.triangle_coords(t), mesh.triangle_signs(t))?;
            Ok(mesh.edge_of_triangle[t]
                .iter()
                .zip(div)
                .filter_map(|(l, d)| mesh.dof_of_edge[l.edge].map(|dof| vector[dof] * d))
                .sum())
        })
        .collect()
}

/// Legacy-VTK unstructured grid with cell data `div_re`, `div_im` and the
/// subdomain tag.
pub fn write_divergence_vtk<W: Write>(
    mesh: &Mesh,
    vector: &[Complex64],
    title: &str,
    mut out: W,
) -> Result<()> {
    let div = divergence_per_triangle(mesh, vector)?;
    let nt = mesh.triangles.len();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.replace('\n', " "))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.vertices.len())?;
    for v in &mesh.vertices {
        writeln!(out, "{:.17e} {:.17e} 0", v[0], v[1])?;
    }
    writeln!(out, "CELLS {nt} {}", 4 * nt)?;
    for t in &mesh.triangles {
        writeln!(
            out,
            "3 {} {} {}",
            t.vertices[0], t.vertices[1], t.vertices[2]
        )?;
    }
    writeln!(out, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(out, "5")?;
    }
    writeln!(out, "CELL_DATA {nt}")?;
    for (name, part) in [("div_re", 0), ("div_im", 1)] {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for d in &div {
            writeln!(out, "{:.17e}", if part == 0 { d.re } else { d.im })?;
        }
    }
    writeln!(out, "SCALARS subdomain int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for t in &mesh.triangles {
        writeln!(out, "{}", t.subdomain.tag())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_mesh, GeometryConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mesh() -> Mesh {
        build_rect_mesh(&GeometryConfig::new(1.0, 2.0, 1.25).unwrap(), 4).unwrap()
    }

    fn area(p: [[f64; 2]; 3]) -> f64 {
        0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
            - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
    }

    #[test]
    fn divergence_integrates_to_zero() {
        // Zero normal flux on the boundary: the total divergence vanishes.
        let m = mesh();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<Complex64> = (0..m.num_dofs())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let div = divergence_per_triangle(&m, &v).unwrap();
        let total: Complex64 = div
            .iter()
            .enumerate()
            .map(|(t, d)| d * area(m.triangle_coords(t)))
            .sum();
        assert!(total.norm() < 1e-12);
    }

    #[test]
    fn single_edge_divergence() {
        // A lone basis function has equal and opposite flux through its edge.
        let m = mesh();
        let mut v = vec![Complex64::new(0.0, 0.0); m.num_dofs()];
        v[10] = Complex64::new(1.0, 0.0);
        let div = divergence_per_triangle(&m, &v).unwrap();
        let e = m.edge_of_dof[10];
        let nonzero: Vec<usize> = (0..div.len()).filter(|&t| div[t].norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 2);
        let flux: f64 = nonzero
            .iter()
            .map(|&t| div[t].re * area(m.triangle_coords(t)))
            .sum();
        assert!(flux.abs() < 1e-14);
        let len = m.edge_length(e);
        for &t in &nonzero {
            assert!(((div[t].re * area(m.triangle_coords(t))).abs() - len).abs() < 1e-14);
        }
    }

    #[test]
    fn csv_rows() {
        let m = mesh();
        let v = vec![Complex64::new(1.0, -2.0); m.num_dofs()];
        let mut buf = Vec::new();
        write_eigenvector_csv(&m, &v, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 84);
        assert_eq!(
            text.lines().next().unwrap(),
            "edge_index,midpoint_x,midpoint_y,normal_x,normal_y,coeff_re,coeff_im"
        );
        let first: Vec<f64> = text
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(first.len(), 7);
        assert!((first[3].hypot(first[4]) - 1.0).abs() < 1e-15);
        assert!(write_eigenvector_csv(&m, &v[1..], Vec::new()).is_err());
    }

    #[test]
    fn vtk_sections() {
        let m = mesh();
        let v = vec![Complex64::new(0.5, 0.0); m.num_dofs()];
        let mut buf = Vec::new();
        write_divergence_vtk(&m, &v, "mode 1", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\nmode 1\nASCII\n"));
        assert!(text.contains("POINTS 45 double"));
        assert!(text.contains("CELLS 64 256"));
        assert!(text.contains("CELL_DATA 64"));
        assert_eq!(text.matches("SCALARS").count(), 3);
    }
}
