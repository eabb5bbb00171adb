//! End-to-end runs: a single solve, the dispersion-relation oracle, and
//! convergence studies that pair computed eigenvalues with oracle roots.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::MaterialConfig;
use crate::config::{ComplexValue, RunConfig};
use crate::error::Result;
use crate::export::{BandRecord, PairRecord, SolveReport, Timings};
use crate::mesh::{build_rect_mesh_with, Mesh};
use crate::oracle::{find_roots, DispersionProblem, Root, SearchBox};
use crate::solver::{
    check_eigenpair, essential_band, filter_spurious, fit_convergence_order, is_zero_frequency,
    solve_qep, EigenPair, QuadraticPencil,
};

/// Largest relative distance at which a computed eigenvalue may be paired
/// with an oracle root.
pub const MATCH_RADIUS: f64 = 0.05;

pub struct SolveOutcome {
    pub mesh: Mesh,
    /// Kept pairs, in the same order as `report.pairs`.
    pub pairs: Vec<EigenPair>,
    pub report: SolveReport,
}

fn by_frequency(a: Complex64, b: Complex64) -> std::cmp::Ordering {
    a.im.abs()
        .total_cmp(&b.im.abs())
        .then(a.re.total_cmp(&b.re))
}

/// Mesh, assemble, solve, check and filter at refinement `n`.
pub fn run_solve(config: &RunConfig, n: usize) -> Result<SolveOutcome> {
    let start = Instant::now();
    let mesh = build_rect_mesh_with(&config.geometry, n, config.mesh.pattern)?;
    let pencil = QuadraticPencil::from_mesh(&mesh, &config.materials)?;
    let assembled = start.elapsed().as_secs_f64();

    let options = config.solver.options(&config.geometry, &config.materials)?;
    let solution = solve_qep(&pencil, &options)?;
    let solved = start.elapsed().as_secs_f64();

    let band = essential_band(&config.materials);
    let zero_mode = |p: &EigenPair| is_zero_frequency(&pencil, p).unwrap_or(false);
    let filtered = filter_spurious(
        solution.pairs,
        band.as_ref(),
        config.solver.filter_tol_imag,
        zero_mode,
    );
    let mut warnings = filtered.warnings;

    let mut kept: Vec<(EigenPair, PairRecord)> = Vec::with_capacity(filtered.kept.len());
    for pair in filtered.kept {
        let check = check_eigenpair(&pencil, &pair)?;
        let (l, r) = (pair.lambda, check.residual);
        if !pair.converged {
            warnings.push(format!(
                "eigenvalue {:.6}{:+.6}i did not converge (residual {r:.2e})",
                l.re, l.im
            ));
        }
        if check.decay_violation {
            warnings.push(format!(
                "eigenvalue {:.6}{:+.6}i has nonnegative real part",
                l.re, l.im
            ));
        }
        if check.inviscid_real_part_violation {
            warnings.push(format!(
                "inviscid eigenvalue {:.6}{:+.6}i is not purely imaginary",
                l.re, l.im
            ));
        }
        let record = PairRecord::new(&pair, &check);
        kept.push((pair, record));
    }
    kept.sort_by(|a, b| by_frequency(a.0.lambda, b.0.lambda));

    let mut discarded = Vec::with_capacity(filtered.discarded.len());
    for pair in &filtered.discarded {
        discarded.push(PairRecord::new(pair, &check_eigenpair(&pencil, pair)?));
    }

    let (pairs, records): (Vec<_>, Vec<_>) = kept.into_iter().unzip();
    let report = SolveReport {
        config: config.clone(),
        refinement: n,
        dofs: pencil.dim(),
        shift: solution.shift.into(),
        restarts: solution.restarts,
        operator_applications: solution.operator_applications,
        pairs: records,
        discarded,
        warnings,
        band: band.as_ref().map(BandRecord::from),
        timings: Timings {
            mesh_and_assembly_s: assembled,
            solve_s: solved - assembled,
            total_s: start.elapsed().as_secs_f64(),
        },
    };
    Ok(SolveOutcome {
        mesh,
        pairs,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRoots {
    pub m: usize,
    pub roots: Vec<Root>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub search: SearchBox,
    pub grid: [usize; 2],
    pub modes: Vec<ModeRoots>,
}

impl OracleReport {
    /// All roots, sorted by `|Im λ|`.
    pub fn roots(&self) -> Vec<Root> {
        let mut all: Vec<Root> = self
            .modes
            .iter()
            .flat_map(|m| m.roots.iter().copied())
            .collect();
        all.sort_by(|a, b| by_frequency(a.lambda(), b.lambda()));
        all
    }
}

/// Roots of `f_m` for every configured `m`, searched concurrently.
pub fn run_oracle(config: &RunConfig) -> Result<OracleReport> {
    let o = &config.oracle;
    let search = o.search_box(&config.geometry, &config.materials)?;
    let grid = (o.grid[0], o.grid[1]);
    let modes = o
        .modes
        .par_iter()
        .map(|&m| {
            let problem = DispersionProblem::new(m, config.geometry, config.materials)?;
            let found = find_roots(&problem, &search, grid, o.tol)?;
            Ok(ModeRoots {
                m,
                roots: found.roots,
                diagnostic: found.diagnostic,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleReport {
        search,
        grid: o.grid,
        modes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSolve {
    pub n: usize,
    pub h: f64,
    /// Converged, non-spurious eigenvalues.
    pub eigenvalues: Vec<ComplexValue>,
    pub seconds: f64,
}

/// Solves every level concurrently; results are in level order.
pub fn solve_levels(config: &RunConfig, levels: &[usize]) -> Result<Vec<LevelSolve>> {
    levels
        .par_iter()
        .map(|&n| {
            let out = run_solve(config, n)?;
            Ok(LevelSolve {
                n,
                h: out.mesh.mesh_size(),
                eigenvalues: out
                    .report
                    .pairs
                    .iter()
                    .filter(|p| p.converged)
                    .map(|p| p.lambda().into())
                    .collect(),
                seconds: out.report.timings.total_s,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyColumn {
    pub m: usize,
    pub exact: ComplexValue,
    /// Matched eigenvalue per level, absent when unmatched or conflicting.
    pub values: Vec<Option<ComplexValue>>,
    pub errors: Vec<Option<f64>>,
    pub order: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub levels: Vec<usize>,
    pub mesh_sizes: Vec<f64>,
    pub columns: Vec<StudyColumn>,
}

/// Pairs each root with its nearest computed eigenvalue on every level.
///
/// A pairing farther than [`MATCH_RADIUS`]`·|λ|` is rejected, and when two
/// roots claim the same eigenvalue both pairings are dropped. Orders are
/// fitted only for columns matched on every level.
pub fn match_levels(levels: &[LevelSolve], roots: &[Root]) -> ConvergenceStudy {
    let mut columns: Vec<StudyColumn> = roots
        .iter()
        .map(|r| StudyColumn {
            m: r.m,
            exact: r.lambda().into(),
            values: Vec::with_capacity(levels.len()),
            errors: Vec::with_capacity(levels.len()),
            order: None,
            notes: Vec::new(),
        })
        .collect();

    for level in levels {
        let computed: Vec<Complex64> = level.eigenvalues.iter().map(|&z| z.into()).collect();
        let nearest: Vec<Option<usize>> = roots
            .iter()
            .map(|r| {
                let target = r.lambda();
                (0..computed.len())
                    .min_by(|&a, &b| {
                        (computed[a] - target)
                            .norm()
                            .total_cmp(&(computed[b] - target).norm())
                    })
                    .filter(|&k| (computed[k] - target).norm() <= MATCH_RADIUS * target.norm())
            })
            .collect();
        for (c, col) in columns.iter_mut().enumerate() {
            let claim = nearest[c];
            let conflict = claim.is_some()
                && nearest
                    .iter()
                    .enumerate()
                    .any(|(o, &k)| o != c && k == claim);
            let value = match claim {
                None => {
                    col.notes.push(format!(
                        "N={}: no computed eigenvalue within {}% of the root",
                        level.n,
                        MATCH_RADIUS * 100.0
                    ));
                    None
                }
                Some(_) if conflict => {
                    col.notes.push(format!(
                        "N={}: matching conflict with another root",
                        level.n
                    ));
                    None
                }
                Some(k) => Some(computed[k]),
            };
            col.values.push(value.map(Into::into));
            col.errors
                .push(value.map(|z| (z - Complex64::from(col.exact)).norm()));
        }
    }

    for col in &mut columns {
        let samples: Option<Vec<(f64, f64)>> = levels
            .iter()
            .zip(&col.errors)
            .map(|(l, e)| e.map(|e| (l.h, e)))
            .collect();
        if let Some(samples) = samples {
            match fit_convergence_order(&samples) {
                Ok(order) => col.order = Some(order),
                Err(e) => col.notes.push(format!("order not fitted: {e}")),
            }
        }
    }
    ConvergenceStudy {
        levels: levels.iter().map(|l| l.n).collect(),
        mesh_sizes: levels.iter().map(|l| l.h).collect(),
        columns,
    }
}

/// Oracle roots, level solves and matching in one call.
pub fn run_convergence(
    config: &RunConfig,
) -> Result<(OracleReport, Vec<LevelSolve>, ConvergenceStudy)> {
    let levels = config.study_levels()?;
    let oracle = run_oracle(config)?;
    let solves = solve_levels(config, &levels)?;
    let study = match_levels(&solves, &oracle.roots());
    Ok((oracle, solves, study))
}

/// `1066.07i` for a purely imaginary value, `-9.83+1066.03i` otherwise.
pub fn format_lambda(z: Complex64) -> String {
    if z.re.abs() < 0.005 {
        format!("{:.2}i", z.im)
    } else {
        format!("{:.2}{:+.2}i", z.re, z.im)
    }
}

impl ConvergenceStudy {
    /// Text table with one row per level, then the fitted orders and the
    /// oracle roots, one column per tracked eigenvalue.
    pub fn write_table<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let cell = |s: String| format!("{s:>18}");
        let mut header = format!("{:>8}", "m");
        for c in &self.columns {
            header += &cell(c.m.to_string());
        }
        writeln!(out, "{header}")?;
        for (k, n) in self.levels.iter().enumerate() {
            let mut row = format!("{:>8}", format!("N={n}"));
            for c in &self.columns {
                row += &cell(c.values[k].map_or("-".into(), |z| format_lambda(z.into())));
            }
            writeln!(out, "{row}")?;
        }
        let mut row = format!("{:>8}", "Order");
        for c in &self.columns {
            row += &cell(c.order.map_or("-".into(), |o| format!("{o:.2}")));
        }
        writeln!(out, "{row}")?;
        let mut row = format!("{:>8}", "Exact");
        for c in &self.columns {
            row += &cell(format_lambda(c.exact.into()));
        }
        writeln!(out, "{row}")?;
        for (i, c) in self.columns.iter().enumerate() {
            for note in &c.notes {
                writeln!(out, "column {}: {note}", i + 1)?;
            }
        }
        Ok(())
    }

    /// `column,m,n,h,lambda_re,lambda_im,exact_re,exact_im,error,order`,
    /// one row per column and level; missing values are empty fields.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "column,m,n,h,lambda_re,lambda_im,exact_re,exact_im,error,order"
        )?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.17e}"));
        for (i, c) in self.columns.iter().enumerate() {
            for (k, (&n, &h)) in self.levels.iter().zip(&self.mesh_sizes).enumerate() {
                let z = c.values[k];
                writeln!(
                    out,
                    "{},{},{n},{h:.17e},{},{},{:.17e},{:.17e},{},{}",
                    i + 1,
                    c.m,
                    opt(z.map(|z| z.re)),
                    opt(z.map(|z| z.im)),
                    c.exact.re,
                    c.exact.im,
                    opt(c.errors[k]),
                    opt(c.order),
                )?;
            }
        }
        Ok(())
    }
}

/// Materials with both viscosities set to zero, for paired inviscid runs.
pub fn inviscid_config(config: &RunConfig) -> RunConfig {
    RunConfig {
        materials: MaterialConfig::inviscid(&config.materials),
        ..config.clone()
    }
}
