//! Structured triangulations of the cavity `(0,A)×(0,B)` with the fluid
//! interface `y = H` on a horizontal mesh line.
//!
//! Every square cell of side `A/N` is split into two triangles along one of
//! its diagonals (see [`DiagonalPattern`]). Edges are the RT0 degrees of
//! freedom; each edge carries
//! a global orientation (from the lower to the higher vertex index, with the
//! normal obtained by a clockwise rotation of that tangent).

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed when checking that `N·H/A` and `N·B/A` are integers.
const ALIGNMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Cavity width `A` in meters.
    pub width: f64,
    /// Cavity height `B` in meters.
    pub height: f64,
    /// Interface height `H` in meters, strictly between 0 and `B`.
    pub interface: f64,
}

impl GeometryConfig {
    pub fn new(width: f64, height: f64, interface: f64) -> Result<Self> {
        let g = Self {
            width,
            height,
            interface,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "width must be positive, got {}",
                self.width
            )));
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "height must be positive, got {}",
                self.height
            )));
        }
        if !(self.interface > 0.0 && self.interface < self.height) {
            return Err(Error::InvalidGeometry(format!(
                "interface must lie strictly inside (0, {}), got {}",
                self.height, self.interface
            )));
        }
        Ok(())
    }
}

/// Fluid occupying a triangle: 1 below the interface, 2 above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subdomain {
    Lower,
    Upper,
}

impl Subdomain {
    pub fn tag(self) -> u8 {
        match self {
            Subdomain::Lower => 1,
            Subdomain::Upper => 2,
        }
    }
}

/// How square cells are split into triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalPattern {
    /// Mirror-symmetric about `x = A/2`: cells in the left half are split
    /// bottom-right to top-left, cells in the right half bottom-left to
    /// top-right. This is the splitting that reproduces the reference tables.
    #[default]
    Symmetric,
    /// Every cell split bottom-left to top-right.
    Uniform,
}

impl DiagonalPattern {
    /// Whether cell column `i` of `n` is split bottom-right to top-left.
    fn anti_diagonal(self, i: usize, n: usize) -> bool {
        match self {
            DiagonalPattern::Symmetric => 2 * i < n,
            DiagonalPattern::Uniform => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    /// Counterclockwise vertex indices.
    pub vertices: [usize; 3],
    pub subdomain: Subdomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// `vertices[0] < vertices[1]`; the tangent runs from the first to the second.
    pub vertices: [usize; 2],
    pub boundary: bool,
}

/// Local edge of a triangle: the global edge index and whether the global
/// normal points out of (`+1`) or into (`-1`) the triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalEdge {
    pub edge: usize,
    pub sign: i8,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub geometry: GeometryConfig,
    /// Elements per unit width of the rectangle.
    pub refinement: usize,
    pub pattern: DiagonalPattern,
    pub rows: usize,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<Triangle>,
    /// Sorted lexicographically by vertex pair.
    pub edges: Vec<Edge>,
    /// Local edge `i` of a triangle is the one opposite its vertex `i`.
    pub edge_of_triangle: Vec<[LocalEdge; 3]>,
    /// Interior-edge DOF index per edge, `None` on the boundary.
    pub dof_of_edge: Vec<Option<usize>>,
    /// Edge index per DOF.
    pub edge_of_dof: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub refinement: usize,
    pub vertices: usize,
    pub triangles: usize,
    pub lower_triangles: usize,
    pub upper_triangles: usize,
    pub edges: usize,
    pub boundary_edges: usize,
    /// RT0 DOF count after eliminating boundary normal traces.
    pub interior_edges: usize,
    pub mesh_size: f64,
}

fn integral_ratio(value: f64) -> Option<usize> {
    let r = value.round();
    if r >= 1.0 && (value - r).abs() <= ALIGNMENT_TOL * value.abs().max(1.0) {
        Some(r as usize)
    } else {
        None
    }
}

/// Uniform mesh of `N` columns by `N·B/A` rows of squares, split with the
/// default [`DiagonalPattern`].
pub fn build_rect_mesh(geom: &GeometryConfig, n: usize) -> Result<Mesh> {
    build_rect_mesh_with(geom, n, DiagonalPattern::default())
}

pub fn build_rect_mesh_with(
    geom: &GeometryConfig,
    n: usize,
    pattern: DiagonalPattern,
) -> Result<Mesh> {
    geom.validate()?;
    if n == 0 {
        return Err(Error::InvalidGeometry(
            "refinement N must be positive".into(),
        ));
    }
    let nf = n as f64;
    let row_ratio = nf * geom.height / geom.width;
    let rows = integral_ratio(row_ratio).ok_or(Error::NonIntegerRows {
        n,
        ratio: row_ratio,
    })?;
    let iface_ratio = nf * geom.interface / geom.width;
    let iface_row = integral_ratio(iface_ratio).ok_or(Error::MisalignedInterface {
        interface: geom.interface,
        n,
        ratio: iface_ratio,
    })?;
    if iface_row >= rows {
        return Err(Error::MisalignedInterface {
            interface: geom.interface,
            n,
            ratio: iface_ratio,
        });
    }

    let h = geom.width / nf;
    let stride = n + 1;
    let mut vertices = Vec::with_capacity(stride * (rows + 1));
    for j in 0..=rows {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * rows);
    for j in 0..rows {
        let subdomain = if j < iface_row {
            Subdomain::Lower
        } else {
            Subdomain::Upper
        };
        for i in 0..n {
            let v00 = j * stride + i;
            let v10 = v00 + 1;
            let v01 = v00 + stride;
            let v11 = v01 + 1;
            if pattern.anti_diagonal(i, n) {
                triangles.push(Triangle {
                    vertices: [v00, v10, v01],
                    subdomain,
                });
                triangles.push(Triangle {
                    vertices: [v10, v11, v01],
                    subdomain,
                });
            } else {
                triangles.push(Triangle {
                    vertices: [v00, v10, v11],
                    subdomain,
                });
                triangles.push(Triangle {
                    vertices: [v00, v11, v01],
                    subdomain,
                });
            }
        }
    }

    // Edge key -> number of incident triangles.
    let mut incidence: BTreeMap<(usize, usize), u8> = BTreeMap::new();
    for t in &triangles {
        for k in 0..3 {
            let a = t.vertices[(k + 1) % 3];
            let b = t.vertices[(k + 2) % 3];
            *incidence.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let edges: Vec<Edge> = incidence
        .iter()
        .map(|(&(a, b), &count)| Edge {
            vertices: [a, b],
            boundary: count == 1,
        })
        .collect();
    let index: BTreeMap<(usize, usize), usize> =
        incidence.keys().enumerate().map(|(i, &k)| (k, i)).collect();

    let mut edge_of_triangle = Vec::with_capacity(triangles.len());
    for t in &triangles {
        let mut local = [LocalEdge { edge: 0, sign: 1 }; 3];
        for (k, slot) in local.iter_mut().enumerate() {
            let a = t.vertices[(k + 1) % 3];
            let b = t.vertices[(k + 2) % 3];
            let edge = index[&(a.min(b), a.max(b))];
            let normal = edge_normal(&vertices, &edges[edge]);
            let pa = vertices[a];
            let pb = vertices[b];
            let opp = vertices[t.vertices[k]];
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let out = normal[0] * (mid[0] - opp[0]) + normal[1] * (mid[1] - opp[1]);
            *slot = LocalEdge {
                edge,
                sign: if out > 0.0 { 1 } else { -1 },
            };
        }
        edge_of_triangle.push(local);
    }

    let mut dof_of_edge = vec![None; edges.len()];
    let mut edge_of_dof = Vec::new();
    for (e, edge) in edges.iter().enumerate() {
        if !edge.boundary {
            dof_of_edge[e] = Some(edge_of_dof.len());
            edge_of_dof.push(e);
        }
    }

    Ok(Mesh {
        geometry: *geom,
        refinement: n,
        pattern,
        rows,
        vertices,
        triangles,
        edges,
        edge_of_triangle,
        dof_of_edge,
        edge_of_dof,
    })
}

/// Unit normal of an edge: its tangent rotated clockwise.
pub fn edge_normal(vertices: &[[f64; 2]], edge: &Edge) -> [f64; 2] {
    let a = vertices[edge.vertices[0]];
    let b = vertices[edge.vertices[1]];
    let t = [b[0] - a[0], b[1] - a[1]];
    let len = t[0].hypot(t[1]);
    [t[1] / len, -t[0] / len]
}

impl Mesh {
    pub fn mesh_size(&self) -> f64 {
        self.geometry.width / self.refinement as f64
    }

    pub fn num_dofs(&self) -> usize {
        self.edge_of_dof.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let v = self.triangles[t].vertices;
        [
            self.vertices[v[0]],
            self.vertices[v[1]],
            self.vertices[v[2]],
        ]
    }

    pub fn triangle_signs(&self, t: usize) -> [f64; 3] {
        let l = &self.edge_of_triangle[t];
        [l[0].sign as f64, l[1].sign as f64, l[2].sign as f64]
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        (pb[0] - pa[0]).hypot(pb[1] - pa[1])
    }

    pub fn stats(&self) -> MeshStats {
        mesh_stats(self)
    }

    /// Plain-text dump: `vertices`, `triangles` and `edges` sections, each
    /// introduced by a header line with its entity count.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let g = &self.geometry;
        writeln!(
            out,
            "# resonavis mesh N={} A={} B={} H={} pattern={:?}",
            self.refinement, g.width, g.height, g.interface, self.pattern
        )?;
        writeln!(out, "vertices {}", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(out, "{} {}", v[0], v[1])?;
        }
        writeln!(out, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            let v = t.vertices;
            writeln!(out, "{} {} {} {}", v[0], v[1], v[2], t.subdomain.tag())?;
        }
        writeln!(out, "edges {}", self.edges.len())?;
        for e in &self.edges {
            writeln!(
                out,
                "{} {} {}",
                e.vertices[0],
                e.vertices[1],
                u8::from(e.boundary)
            )?;
        }
        Ok(())
    }
}

pub fn mesh_stats(mesh: &Mesh) -> MeshStats {
    let lower = mesh
        .triangles
        .iter()
        .filter(|t| t.subdomain == Subdomain::Lower)
        .count();
    let boundary = mesh.edges.iter().filter(|e| e.boundary).count();
    MeshStats {
        refinement: mesh.refinement,
        vertices: mesh.vertices.len(),
        triangles: mesh.triangles.len(),
        lower_triangles: lower,
        upper_triangles: mesh.triangles.len() - lower,
        edges: mesh.edges.len(),
        boundary_edges: boundary,
        interior_edges: mesh.edges.len() - boundary,
        mesh_size: mesh.mesh_size(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_fluid_geometry() -> GeometryConfig {
        GeometryConfig::new(1.0, 2.0, 1.25).unwrap()
    }

    fn signed_area(p: [[f64; 2]; 3]) -> f64 {
        0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
            - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
    }

    #[test]
    fn coarse_mesh_counts() {
        let mesh = build_rect_mesh(&two_fluid_geometry(), 4).unwrap();
        let s = mesh.stats();
        assert_eq!(s.vertices, 45);
        assert_eq!(s.triangles, 64);
        assert_eq!(s.edges, 108);
        assert_eq!(s.boundary_edges, 24);
        assert_eq!(s.interior_edges, 84);
        assert_eq!(s.lower_triangles, 2 * 4 * 5);
        assert_eq!(s.upper_triangles, 2 * 4 * 3);
        assert_eq!(s.vertices as i64 - s.edges as i64 + s.triangles as i64, 1);
        assert_eq!(s.mesh_size, 0.25);
    }

    #[test]
    fn n8_triangle_count() {
        let mesh = build_rect_mesh(&two_fluid_geometry(), 8).unwrap();
        assert_eq!(mesh.triangles.len(), 256);
    }

    #[test]
    fn misaligned_interface_is_rejected() {
        let err = build_rect_mesh(&two_fluid_geometry(), 3).unwrap_err();
        assert!(
            matches!(err, Error::MisalignedInterface { n: 3, .. }),
            "{err}"
        );
    }

    #[test]
    fn non_integer_rows_rejected() {
        let g = GeometryConfig::new(1.0, 1.3, 0.5).unwrap();
        assert!(matches!(
            build_rect_mesh(&g, 2),
            Err(Error::NonIntegerRows { .. })
        ));
        let unit = GeometryConfig::new(1.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            build_rect_mesh(&unit, 1),
            Err(Error::MisalignedInterface { .. })
        ));
    }

    #[test]
    fn invalid_geometry() {
        assert!(GeometryConfig::new(0.0, 1.0, 0.5).is_err());
        assert!(GeometryConfig::new(1.0, 1.0, 1.0).is_err());
        assert!(GeometryConfig::new(1.0, 1.0, 0.0).is_err());
        assert!(build_rect_mesh(&two_fluid_geometry(), 0).is_err());
    }

    #[test]
    fn family_invariants() {
        for n in [4usize, 8, 16, 32, 64] {
            let mesh = build_rect_mesh(&two_fluid_geometry(), n).unwrap();
            let rows = 2 * n;
            let s = mesh.stats();
            assert_eq!(s.triangles, 2 * n * rows);
            assert_eq!(s.boundary_edges, 2 * (n + rows));
            assert_eq!(s.vertices as i64 - s.edges as i64 + s.triangles as i64, 1);

            let mut incident = vec![0usize; mesh.edges.len()];
            let mut sign_sum = vec![0i32; mesh.edges.len()];
            for local in &mesh.edge_of_triangle {
                for l in local {
                    incident[l.edge] += 1;
                    sign_sum[l.edge] += l.sign as i32;
                }
            }
            for (e, edge) in mesh.edges.iter().enumerate() {
                assert_eq!(incident[e], if edge.boundary { 1 } else { 2 });
                if !edge.boundary {
                    assert_eq!(sign_sum[e], 0, "edge {e}");
                }
            }
        }
    }

    #[test]
    fn no_triangle_straddles_interface() {
        let g = two_fluid_geometry();
        let mesh = build_rect_mesh(&g, 8).unwrap();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let p = mesh.triangle_coords(t);
            for v in p {
                match tri.subdomain {
                    Subdomain::Lower => assert!(v[1] <= g.interface + 1e-12),
                    Subdomain::Upper => assert!(v[1] >= g.interface - 1e-12),
                }
            }
            assert!(signed_area(p) > 0.0);
        }
    }

    #[test]
    fn doubling_quarters_areas() {
        let g = two_fluid_geometry();
        for n in [4usize, 8, 16, 32] {
            let coarse = build_rect_mesh(&g, n).unwrap();
            let fine = build_rect_mesh(&g, 2 * n).unwrap();
            let a0 = signed_area(coarse.triangle_coords(0));
            for t in 0..coarse.triangles.len() {
                assert_eq!(signed_area(coarse.triangle_coords(t)), a0);
            }
            for t in 0..fine.triangles.len() {
                assert_eq!(signed_area(fine.triangle_coords(t)), a0 / 4.0);
            }
        }
    }

    #[test]
    fn edges_sorted_and_dofs_ordered() {
        let mesh = build_rect_mesh(&two_fluid_geometry(), 4).unwrap();
        assert!(mesh.edges.windows(2).all(|w| w[0].vertices < w[1].vertices));
        assert!(mesh.edges.iter().all(|e| e.vertices[0] < e.vertices[1]));
        assert!(mesh.edge_of_dof.windows(2).all(|w| w[0] < w[1]));
        for (d, &e) in mesh.edge_of_dof.iter().enumerate() {
            assert_eq!(mesh.dof_of_edge[e], Some(d));
        }
    }

    #[test]
    fn text_dump_sections() {
        let mesh = build_rect_mesh(&two_fluid_geometry(), 4).unwrap();
        let mut buf = Vec::new();
        mesh.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("vertices 45\n"));
        assert!(text.contains("triangles 64\n"));
        assert!(text.contains("edges 108\n"));
        assert_eq!(text.lines().count(), 1 + 1 + 45 + 1 + 64 + 1 + 108);
    }

    /// Sorted edge endpoints in rounded coordinates, optionally mirrored about `x = A/2`.
    fn edge_keys(mesh: &Mesh, mirror: bool) -> Vec<[(i64, i64); 2]> {
        let a = mesh.geometry.width;
        let key = |v: usize| {
            let p = mesh.vertices[v];
            let x = if mirror { a - p[0] } else { p[0] };
            ((x * 1e9).round() as i64, (p[1] * 1e9).round() as i64)
        };
        let mut keys: Vec<[(i64, i64); 2]> = mesh
            .edges
            .iter()
            .map(|e| {
                let (p, q) = (key(e.vertices[0]), key(e.vertices[1]));
                [p.min(q), p.max(q)]
            })
            .collect();
        keys.sort_unstable();
        keys
    }

    #[test]
    fn symmetric_pattern_is_mirror_invariant() {
        let mesh = build_rect_mesh(&two_fluid_geometry(), 8).unwrap();
        assert_eq!(mesh.pattern, DiagonalPattern::Symmetric);
        assert!(edge_keys(&mesh, false) == edge_keys(&mesh, true));
        let uniform =
            build_rect_mesh_with(&two_fluid_geometry(), 8, DiagonalPattern::Uniform).unwrap();
        assert!(edge_keys(&uniform, false) != edge_keys(&uniform, true));
    }

    #[test]
    fn patterns_share_counts() {
        for n in [4usize, 8] {
            let a = build_rect_mesh_with(&two_fluid_geometry(), n, DiagonalPattern::Symmetric)
                .unwrap()
                .stats();
            let b = build_rect_mesh_with(&two_fluid_geometry(), n, DiagonalPattern::Uniform)
                .unwrap()
                .stats();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn uniform_cells_share_the_diagonal() {
        let mesh =
            build_rect_mesh_with(&two_fluid_geometry(), 4, DiagonalPattern::Uniform).unwrap();
        let stride = mesh.refinement + 1;
        for t in mesh.triangles.chunks(2) {
            // Both halves contain the bottom-left and top-right corners.
            let v00 = t[0].vertices[0];
            assert!(t[0].vertices.contains(&(v00 + stride + 1)));
            assert!(t[1].vertices.contains(&v00) && t[1].vertices.contains(&(v00 + stride + 1)));
        }
    }
}
