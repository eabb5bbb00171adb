//! JSON run configuration shared by every subcommand.
//!
//! Units are SI throughout: lengths in m, densities in kg/m³, sound speeds in
//! m/s, viscosities in N·s/m², and eigenvalues/shifts in 1/s.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::MaterialConfig;
use crate::error::{Error, Result};
use crate::mesh::{DiagonalPattern, GeometryConfig};
use crate::oracle::{lowest_inviscid_frequency, SearchBox};
use crate::solver::{SolveOptions, MAX_KRYLOV_DIM};

/// Fraction of the lowest inviscid frequency used as the default shift.
pub const DEFAULT_SHIFT_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexValue> for Complex64 {
    fn from(z: ComplexValue) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Elements per width for single runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Strictly increasing refinements for convergence studies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    #[serde(default)]
    pub pattern: DiagonalPattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Defaults to `i·0.9·ω₁` with `ω₁` the lowest inviscid frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ComplexValue>,
    #[serde(default = "default_nev")]
    pub nev: usize,
    /// Defaults to `min(3·nev + 10, 200)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krylov_dim: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_restarts")]
    pub max_restarts: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Relative imaginary part below which an eigenvalue counts as real when
    /// filtering the essential band.
    #[serde(default = "default_tol_imag")]
    pub filter_tol_imag: f64,
}

fn default_nev() -> usize {
    6
}
fn default_tol() -> f64 {
    1e-10
}
fn default_restarts() -> usize {
    5
}
fn default_seed() -> u64 {
    1
}
fn default_tol_imag() -> f64 {
    1e-3
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            shift: None,
            nev: default_nev(),
            krylov_dim: None,
            tol: default_tol(),
            max_restarts: default_restarts(),
            seed: default_seed(),
            filter_tol_imag: default_tol_imag(),
        }
    }
}

impl SolverConfig {
    /// The configured shift, or the default derived from the dispersion relation.
    pub fn resolve_shift(
        &self,
        geometry: &GeometryConfig,
        materials: &MaterialConfig,
    ) -> Result<Complex64> {
        match self.shift {
            Some(s) => Ok(s.into()),
            None => {
                let w1 = lowest_inviscid_frequency(geometry, materials)?;
                Ok(Complex64::new(0.0, DEFAULT_SHIFT_FRACTION * w1))
            }
        }
    }

    pub fn options(
        &self,
        geometry: &GeometryConfig,
        materials: &MaterialConfig,
    ) -> Result<SolveOptions> {
        let base = SolveOptions::new(self.resolve_shift(geometry, materials)?, self.nev);
        Ok(SolveOptions {
            krylov_dim: self.krylov_dim.unwrap_or(base.krylov_dim),
            tol: self.tol,
            max_restarts: self.max_restarts,
            seed: self.seed,
            ..base
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Horizontal mode indices `m` to search.
    #[serde(default = "default_modes")]
    pub modes: Vec<usize>,
    /// Rectangle of the λ-plane; derived from the data when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchBox>,
    /// Root-search grid `[nx, ny]` (Re × Im).
    #[serde(default = "default_grid")]
    pub grid: [usize; 2],
    /// Acceptance threshold relative to the median grid `|f_m|`.
    #[serde(default = "default_root_tol")]
    pub tol: f64,
    /// Contour sampling grid `[nx, ny]`.
    #[serde(default = "default_contour_grid")]
    pub contour_grid: [usize; 2],
}

fn default_modes() -> Vec<usize> {
    vec![0, 1, 2, 3]
}
fn default_grid() -> [usize; 2] {
    [32, 600]
}
fn default_root_tol() -> f64 {
    1e-6
}
fn default_contour_grid() -> [usize; 2] {
    [101, 101]
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            modes: default_modes(),
            search: None,
            grid: default_grid(),
            tol: default_root_tol(),
            contour_grid: default_contour_grid(),
        }
    }
}

impl OracleConfig {
    /// The configured box, or `[−1.5·d − 1, 1] × [ω₁/2, 4ω₁]` where `ω₁` is
    /// the lowest inviscid frequency and `d = maxᵢ νᵢ(4ω₁)²/(ρᵢcᵢ²)` bounds the
    /// decay rate of a single fluid at the top of the box.
    pub fn search_box(
        &self,
        geometry: &GeometryConfig,
        materials: &MaterialConfig,
    ) -> Result<SearchBox> {
        if let Some(b) = self.search {
            return Ok(b);
        }
        let w1 = lowest_inviscid_frequency(geometry, materials)?;
        let top = 4.0 * w1;
        let decay = materials
            .fluids()
            .iter()
            .map(|f| f.viscosity * top * top / f.bulk_modulus())
            .fold(0.0, f64::max);
        Ok(SearchBox::new((-1.5 * decay - 1.0, 1.0), (0.5 * w1, top)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// JSON report.
    Json,
    /// Eigenvector and table CSV files.
    Csv,
    /// Legacy VTK files with the divergence of each mode.
    Vtk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_directory() -> PathBuf {
    PathBuf::from("resonavis-out")
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Json]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: default_formats(),
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub materials: MaterialConfig,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parses and validates; parse errors carry the JSON path of the offending field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(
                path.display().to_string(),
                format!("cannot read config: {e}"),
            )
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.materials.validate()?;

        match (&self.mesh.n, &self.mesh.levels) {
            (None, None) => {
                return Err(Error::config("mesh", "one of `n` or `levels` is required"))
            }
            (Some(0), _) => return Err(Error::config("mesh.n", "refinement must be positive")),
            _ => {}
        }
        if let Some(levels) = &self.mesh.levels {
            if levels.is_empty() || levels[0] == 0 {
                return Err(Error::config("mesh.levels", "levels must be positive"));
            }
            if levels.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config(
                    "mesh.levels",
                    "levels must be strictly increasing",
                ));
            }
        }

        let s = &self.solver;
        if s.nev == 0 {
            return Err(Error::config("solver.nev", "must be positive"));
        }
        if let Some(k) = s.krylov_dim {
            if k <= s.nev || k > MAX_KRYLOV_DIM {
                return Err(Error::config(
                    "solver.krylov_dim",
                    format!(
                        "must satisfy nev < krylov_dim <= {MAX_KRYLOV_DIM}, got {k} with nev = {}",
                        s.nev
                    ),
                ));
            }
        }
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return Err(Error::config(
                "solver.tol",
                format!("must lie in (0, 1), got {}", s.tol),
            ));
        }
        if !(s.filter_tol_imag >= 0.0 && s.filter_tol_imag < 1.0) {
            return Err(Error::config(
                "solver.filter_tol_imag",
                "must lie in [0, 1)",
            ));
        }
        if let Some(shift) = s.shift {
            if !(shift.re.is_finite() && shift.im.is_finite()) {
                return Err(Error::config("solver.shift", "must be finite"));
            }
        }

        let o = &self.oracle;
        if let Some(b) = &o.search {
            b.validate()
                .map_err(|e| Error::config("oracle.search", e.to_string()))?;
        }
        if o.grid.iter().any(|&g| g < crate::oracle::roots::MIN_GRID) {
            return Err(Error::config(
                "oracle.grid",
                format!(
                    "each size must be at least {}",
                    crate::oracle::roots::MIN_GRID
                ),
            ));
        }
        if o.contour_grid.iter().any(|&g| g < 2) {
            return Err(Error::config(
                "oracle.contour_grid",
                "each size must be at least 2",
            ));
        }
        if !(o.tol > 0.0) {
            return Err(Error::config("oracle.tol", "must be positive"));
        }
        Ok(())
    }

    /// Refinement for single runs: `mesh.n`, else the finest level.
    pub fn refinement(&self) -> usize {
        self.mesh
            .n
            .or_else(|| self.mesh.levels.as_ref().and_then(|l| l.last().copied()))
            .unwrap_or(0)
    }

    /// Levels for a convergence study (at least three).
    pub fn study_levels(&self) -> Result<Vec<usize>> {
        match &self.mesh.levels {
            Some(l) if l.len() >= 3 => Ok(l.clone()),
            Some(l) => Err(Error::config(
                "mesh.levels",
                format!(
                    "a convergence study needs at least 3 levels, got {}",
                    l.len()
                ),
            )),
            None => Err(Error::config(
                "mesh.levels",
                "a convergence study needs `mesh.levels`",
            )),
        }
    }
}
