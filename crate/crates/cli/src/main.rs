//! `resonavis`: mesh statistics, eigenvalue solves, dispersion-relation roots,
//! convergence studies and contour grids for the two-fluid cavity.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use resonavis::config::{OutputFormat, RunConfig};
use resonavis::export::{write_divergence_vtk, write_eigenvector_csv, write_json};
use resonavis::oracle::{contour_grid, DispersionProblem};
use resonavis::study::{format_lambda, run_convergence, run_oracle, run_solve};
use resonavis::{build_rect_mesh_with, Error};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "resonavis",
    version,
    about = "Vibration modes of two dissipative fluids in a rigid cavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh statistics for `mesh.n`.
    MeshInfo(Common),
    /// Assemble and solve the eigenvalue problem at `mesh.n`.
    Solve(Common),
    /// Roots of the dispersion relation for each `oracle.modes` entry.
    Oracle(Common),
    /// Solve on every `mesh.levels` entry and fit convergence orders.
    Convergence(Common),
    /// Sample log10|f_m| on the search box, one CSV per mode.
    Contour(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Print a JSON document instead of a table.
    #[arg(long)]
    json: bool,
    /// Output directory (overrides `output.directory`).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_configuration() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(format!("i/o error: {e}"))
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::MeshInfo(c) => mesh_info(&c),
        Command::Solve(c) => solve(&c),
        Command::Oracle(c) => oracle(&c),
        Command::Convergence(c) => convergence(&c),
        Command::Contour(c) => contour(&c),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> CmdResult {
    let Ok(value) = std::env::var("RESONAVIS_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            Failure::Config(format!(
                "RESONAVIS_THREADS must be a positive integer, got `{value}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Numerical(format!("cannot start thread pool: {e}")))
}

fn load(c: &Common) -> Result<(RunConfig, PathBuf), Failure> {
    let config = RunConfig::load(&c.config)?;
    let dir = c
        .out
        .clone()
        .unwrap_or_else(|| config.output.directory.clone());
    Ok((config, dir))
}

fn create(dir: &Path, name: &str) -> io::Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn print_json(value: &serde_json::Value) -> CmdResult {
    let stdout = io::stdout();
    write_json(value, stdout.lock())?;
    Ok(())
}

fn mesh_info(c: &Common) -> CmdResult {
    let config = RunConfig::load(&c.config)?;
    let n = config.refinement();
    let mesh = build_rect_mesh_with(&config.geometry, n, config.mesh.pattern)?;
    let stats = mesh.stats();
    if let Some(dir) = &c.out {
        let mut f = create(dir, &format!("mesh_n{n}.txt"))?;
        mesh.write_text(&mut f)?;
        f.flush()?;
    }
    if c.json {
        return print_json(&json!(stats));
    }
    println!("refinement       {}", stats.refinement);
    println!("mesh size h      {:.6e}", stats.mesh_size);
    println!("vertices         {}", stats.vertices);
    println!(
        "triangles        {} ({} lower, {} upper)",
        stats.triangles, stats.lower_triangles, stats.upper_triangles
    );
    println!(
        "edges            {} ({} on the boundary)",
        stats.edges, stats.boundary_edges
    );
    println!("interior edges   {}", stats.interior_edges);
    Ok(())
}

fn solve(c: &Common) -> CmdResult {
    let (config, dir) = load(c)?;
    let n = config.refinement();
    let out = run_solve(&config, n)?;
    let report = &out.report;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }

    let out_cfg = &config.output;
    if out_cfg.wants(OutputFormat::Json) {
        let mut f = create(&dir, &format!("solve_n{n}.json"))?;
        write_json(report, &mut f)?;
        f.flush()?;
    }
    for (k, pair) in out.pairs.iter().enumerate() {
        if out_cfg.wants(OutputFormat::Csv) {
            let mut f = create(&dir, &format!("eigenvector_n{n}_{:02}.csv", k + 1))?;
            write_eigenvector_csv(&out.mesh, &pair.vector, &mut f)?;
            f.flush()?;
        }
        if out_cfg.wants(OutputFormat::Vtk) {
            let mut f = create(&dir, &format!("divergence_n{n}_{:02}.vtk", k + 1))?;
            let title = format!("div u_h, N = {n}, lambda = {}", format_lambda(pair.lambda));
            write_divergence_vtk(&out.mesh, &pair.vector, &title, &mut f)?;
            f.flush()?;
        }
    }

    if c.json {
        return print_json(&json!(report));
    }
    println!(
        "N = {n}, {} DOFs, shift {}, {} restarts, {:.2} s",
        report.dofs,
        format_lambda(report.shift.into()),
        report.restarts,
        report.timings.total_s
    );
    println!(
        "{:>4} {:>24} {:>12} {:>10}",
        "#", "lambda", "residual", "converged"
    );
    for (k, p) in report.pairs.iter().enumerate() {
        println!(
            "{:>4} {:>24} {:>12.3e} {:>10}",
            k + 1,
            format_lambda(p.lambda()),
            p.residual,
            p.converged
        );
    }
    if !report.discarded.is_empty() {
        println!(
            "{} spurious pair(s) discarded (essential band or zero frequency)",
            report.discarded.len()
        );
    }
    Ok(())
}

fn oracle(c: &Common) -> CmdResult {
    let (config, dir) = load(c)?;
    let report = run_oracle(&config)?;
    for mode in &report.modes {
        if mode.roots.is_empty() {
            let why = mode
                .diagnostic
                .as_deref()
                .unwrap_or("no roots in the search box");
            eprintln!("warning: m = {}: {why}", mode.m);
        }
    }
    let roots = report.roots();
    if config.output.wants(OutputFormat::Json) {
        let mut f = create(&dir, "roots.json")?;
        write_json(&roots, &mut f)?;
        f.flush()?;
    }
    if c.json {
        return print_json(&json!(report));
    }
    let b = report.search;
    println!(
        "search box Re [{}, {}] x Im [{}, {}]",
        b.re_min, b.re_max, b.im_min, b.im_max
    );
    println!("{:>3} {:>24} {:>12}", "m", "lambda", "|f_m|");
    for r in &roots {
        println!(
            "{:>3} {:>24} {:>12.3e}",
            r.m,
            format_lambda(r.lambda()),
            r.abs_fm
        );
    }
    Ok(())
}

fn convergence(c: &Common) -> CmdResult {
    let (config, dir) = load(c)?;
    let (oracle, solves, study) = run_convergence(&config)?;
    let document = json!({ "oracle": oracle, "levels": solves, "study": study });
    if config.output.wants(OutputFormat::Json) {
        let mut f = create(&dir, "convergence.json")?;
        write_json(&document, &mut f)?;
        f.flush()?;
    }
    if config.output.wants(OutputFormat::Csv) {
        let mut f = create(&dir, "convergence.csv")?;
        study.write_csv(&mut f)?;
        f.flush()?;
    }
    if c.json {
        return print_json(&document);
    }
    study.write_table(io::stdout().lock())?;
    Ok(())
}

fn contour(c: &Common) -> CmdResult {
    let (config, dir) = load(c)?;
    let search = config
        .oracle
        .search_box(&config.geometry, &config.materials)?;
    let [nx, ny] = config.oracle.contour_grid;
    let mut summary = Vec::new();
    for &m in &config.oracle.modes {
        let problem = DispersionProblem::new(m, config.geometry, config.materials)?;
        let grid = contour_grid(&problem, &search, (nx, ny))?;
        let name = format!("contour_m{m}.csv");
        let mut f = create(&dir, &name)?;
        grid.write_csv(&mut f)?;
        f.flush()?;
        let (i, j) = grid.argmin();
        summary.push(json!({
            "m": m,
            "file": dir.join(&name),
            "min_re": grid.re[i],
            "min_im": grid.im[j],
            "min_log10_abs_fm": grid.value(i, j),
        }));
    }
    if c.json {
        return print_json(&json!(summary));
    }
    for s in &summary {
        println!(
            "m = {}: {} (minimum {:.3} at {:.4}{:+.4}i)",
            s["m"],
            s["file"].as_str().unwrap_or_default(),
            s["min_log10_abs_fm"].as_f64().unwrap_or(f64::NAN),
            s["min_re"].as_f64().unwrap_or(f64::NAN),
            s["min_im"].as_f64().unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
