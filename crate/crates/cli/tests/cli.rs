//! Runs the `resonavis` binary against small configurations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const GEOMETRY: &str = r#""geometry": {"width": 1.0, "height": 2.0, "interface": 1.25}"#;

fn materials(lower_nu: f64, upper_nu: f64) -> String {
    format!(
        r#""materials": {{
            "lower": {{"density": 1000.0, "sound_speed": 1430.0, "viscosity": {lower_nu:?}}},
            "upper": {{"density": 1.0, "sound_speed": 340.0, "viscosity": {upper_nu:?}}}
        }}"#
    )
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resonavis"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn solve_config(dir: &TempDir, nu: (f64, f64), n: usize, nev: usize) -> PathBuf {
    let body = format!(
        r#"{{{GEOMETRY}, {}, "mesh": {{"n": {n}}}, "solver": {{"nev": {nev}}}}}"#,
        materials(nu.0, nu.1)
    );
    write_config(dir, "solve.json", &body)
}

#[test]
fn mesh_info_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = solve_config(&dir, (0.0, 0.0), 4, 6);
    let o = run(&["mesh-info", "--json"], &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let stats: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stats["triangles"], 64);
    assert_eq!(stats["interior_edges"], 84);

    let o = run(&["mesh-info"], &cfg, dir.path());
    assert!(stdout(&o).contains("interior edges   84"));
    assert!(dir.path().join("mesh_n4.txt").exists());
}

#[test]
fn misaligned_interface_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = solve_config(&dir, (0.0, 0.0), 3, 6);
    let o = run(&["mesh-info"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("does not fall on a mesh line"));
}

#[test]
fn inviscid_solve_prints_the_lowest_modes() {
    let dir = TempDir::new().unwrap();
    let cfg = solve_config(&dir, (0.0, 0.0), 16, 6);
    let o = run(&["solve"], &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(
        text.contains("1067.79i") && text.contains("1422.51i"),
        "{text}"
    );

    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("solve_n16.json")).unwrap())
            .unwrap();
    let ims: Vec<f64> = report["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["lambda_im"].as_f64().unwrap())
        .collect();
    for want in [1067.78, 1422.52] {
        assert!(
            ims.iter().any(|im| (im - want).abs() < 0.02),
            "{want} not in {ims:?}"
        );
    }
}

#[test]
fn viscous_solve_prints_a_decaying_mode() {
    let dir = TempDir::new().unwrap();
    let cfg = solve_config(&dir, (9.0, 1.0), 16, 6);
    let o = run(&["solve"], &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("-9.86+1067.74i"), "{}", stdout(&o));
}

#[test]
fn solve_writes_requested_formats() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        r#"{{{GEOMETRY}, {}, "mesh": {{"n": 4}}, "solver": {{"nev": 2}},
            "output": {{"formats": ["json", "csv", "vtk"]}}}}"#,
        materials(9.0, 1.0)
    );
    let cfg = write_config(&dir, "c.json", &body);
    let out = dir.path().join("out");
    let o = run(&["solve"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("solve_n4.json").exists());
    let csv = fs::read_to_string(out.join("eigenvector_n4_01.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 84);
    let vtk = fs::read_to_string(out.join("divergence_n4_01.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
}

#[test]
fn json_reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = solve_config(&dir, (9.0, 1.0), 8, 4);
    let render = || {
        let o = run(&["solve", "--json"], &cfg, dir.path());
        assert!(o.status.success());
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(render(), render());
}

#[test]
fn empty_materials_report_the_field_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        &format!(r#"{{{GEOMETRY}, "materials": {{}}, "mesh": {{"n": 4}}}}"#),
    );
    let o = run(&["solve"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`materials`"), "{}", stderr(&o));

    let cfg = write_config(
        &dir,
        "d.json",
        &format!(
            r#"{{{GEOMETRY}, {}, "mesh": {{"n": 4}}}}"#,
            materials(-1.0, 0.0)
        ),
    );
    let o = run(&["solve"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = run(&["oracle"], &dir.path().join("nope.json"), dir.path());
    assert_eq!(o.status.code(), Some(2));
}

fn oracle_config(dir: &TempDir, nu: (f64, f64), modes: &str, search: &str, grid: &str) -> PathBuf {
    let body = format!(
        r#"{{{GEOMETRY}, {}, "mesh": {{"n": 8}},
            "oracle": {{"modes": {modes}, "search": {search}, "grid": {grid}, "contour_grid": {grid}}}}}"#,
        materials(nu.0, nu.1)
    );
    write_config(dir, "oracle.json", &body)
}

#[test]
fn oracle_viscous_m0_roots() {
    let dir = TempDir::new().unwrap();
    let search = r#"{"re_min": -150.0, "re_max": 10.0, "im_min": 900.0, "im_max": 3700.0}"#;
    let cfg = oracle_config(&dir, (9.0, 1.0), "[0]", search, "[40, 600]");
    let o = run(&["oracle"], &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(
        text.contains("-17.52+1423.76i") && text.contains("-0.05+1797.24i"),
        "{text}"
    );
    let roots: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("roots.json")).unwrap()).unwrap();
    let first = &roots.as_array().unwrap()[0];
    for key in ["m", "lambda_re", "lambda_im", "abs_fm"] {
        assert!(first.get(key).is_some());
    }
}

#[test]
fn oracle_box_without_roots_warns() {
    let dir = TempDir::new().unwrap();
    let search = r#"{"re_min": -1.0, "re_max": 1.0, "im_min": 100.0, "im_max": 900.0}"#;
    let cfg = oracle_config(&dir, (0.0, 0.0), "[0, 1]", search, "[16, 100]");
    let o = run(&["oracle"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
    let roots = fs::read_to_string(dir.path().join("roots.json")).unwrap();
    assert_eq!(roots.trim(), "[]");
}

#[test]
fn contour_two_by_two() {
    let dir = TempDir::new().unwrap();
    let search = r#"{"re_min": -1.0, "re_max": 1.0, "im_min": 1400.0, "im_max": 1450.0}"#;
    let body = format!(
        r#"{{{GEOMETRY}, {}, "mesh": {{"n": 8}}, "oracle": {{"modes": [0], "search": {search}, "contour_grid": [2, 2]}}}}"#,
        materials(0.0, 0.0)
    );
    let cfg = write_config(&dir, "c.json", &body);
    let o = run(&["contour"], &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("contour_m0.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "re,im,log10_abs_fm");
    assert_eq!(csv.lines().count(), 1 + 4);
}

fn contour_minimum(nu: (f64, f64), m: usize, search: &str, grid: &str) -> (f64, f64) {
    let dir = TempDir::new().unwrap();
    let cfg = oracle_config(&dir, nu, &format!("[{m}]"), search, grid);
    let o = run(&["contour", "--json"], &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    (
        v[0]["min_re"].as_f64().unwrap(),
        v[0]["min_im"].as_f64().unwrap(),
    )
}

#[test]
fn inviscid_contour_minimum_is_next_to_the_root() {
    let search = r#"{"re_min": -1.0, "re_max": 1.0, "im_min": 1400.0, "im_max": 1450.0}"#;
    let (_, im) = contour_minimum((0.0, 0.0), 0, search, "[21, 51]");
    assert!((im - 1423.87).abs() <= 1.0, "{im}");
}

#[test]
fn viscous_contour_minimum_has_negative_real_part() {
    let search = r#"{"re_min": -30.0, "re_max": 10.0, "im_min": 1050.0, "im_max": 1090.0}"#;
    let (re, im) = contour_minimum((9.0, 1.0), 1, search, "[41, 41]");
    assert!(
        re < 0.0 && (re + 9.87).abs() <= 1.0 && (im - 1068.32).abs() <= 1.0,
        "{re} {im}"
    );
}

#[test]
fn convergence_needs_three_levels() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        r#"{{{GEOMETRY}, {}, "mesh": {{"levels": [4, 8]}}}}"#,
        materials(0.0, 0.0)
    );
    let cfg = write_config(&dir, "c.json", &body);
    let o = run(&["convergence"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mesh.levels"));
}

#[test]
fn convergence_table_layout() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        r#"{{{GEOMETRY}, {}, "mesh": {{"levels": [4, 8, 16]}},
            "solver": {{"shift": {{"re": 0.0, "im": 1300.0}}, "nev": 4}},
            "oracle": {{"modes": [0, 1], "search": {{"re_min": -1.0, "re_max": 1.0, "im_min": 1000.0, "im_max": 1500.0}},
                        "grid": [16, 200]}},
            "output": {{"formats": ["json", "csv"]}}}}"#,
        materials(0.0, 0.0)
    );
    let cfg = write_config(&dir, "c.json", &body);
    let o = run(&["convergence"], &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().map(str::trim_start).collect();
    assert!(rows[1].starts_with("N=4") && rows[3].starts_with("N=16"));
    assert!(rows[4].starts_with("Order") && rows[5].starts_with("Exact"));
    assert!(
        rows[5].contains("1068.36i") && rows[5].contains("1423.87i"),
        "{text}"
    );
    assert!(dir.path().join("convergence.json").exists());
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}

#[test]
fn thread_cap_is_validated() {
    let dir = TempDir::new().unwrap();
    let cfg = solve_config(&dir, (0.0, 0.0), 4, 2);
    let with = |value: &str| {
        Command::new(env!("CARGO_BIN_EXE_resonavis"))
            .args(["mesh-info", "--config"])
            .arg(&cfg)
            .env("RESONAVIS_THREADS", value)
            .output()
            .unwrap()
    };
    assert!(with("1").status.success());
    assert_eq!(with("0").status.code(), Some(2));
    assert_eq!(with("many").status.code(), Some(2));
}
