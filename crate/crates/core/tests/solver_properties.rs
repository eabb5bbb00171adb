//! End-to-end invariants of the solve pipeline on small meshes.

use num_complex::Complex64;
use resonavis::config::{ComplexValue, RunConfig};
use resonavis::export::write_json;
use resonavis::study::run_solve;

fn config(shift: Complex64, nev: usize) -> RunConfig {
    RunConfig::from_json_str(&format!(
        r#"{{
            "geometry": {{"width": 1.0, "height": 2.0, "interface": 1.25}},
            "materials": {{
                "lower": {{"density": 1000.0, "sound_speed": 1430.0, "viscosity": 9.0}},
                "upper": {{"density": 1.0, "sound_speed": 340.0, "viscosity": 1.0}}
            }},
            "mesh": {{"n": 8}},
            "solver": {{"shift": {{"re": {}, "im": {}}}, "nev": {nev}, "krylov_dim": 40}}
        }}"#,
        shift.re, shift.im
    ))
    .unwrap()
}

fn eigenvalues(config: &RunConfig) -> Vec<Complex64> {
    let out = run_solve(config, 8).unwrap();
    out.report
        .pairs
        .iter()
        .filter(|p| p.converged)
        .map(|p| p.lambda())
        .collect()
}

fn nearest(z: Complex64, set: &[Complex64]) -> f64 {
    set.iter()
        .map(|w| (w - z).norm() / z.norm())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn shift_perturbation_leaves_eigenvalues_unchanged() {
    let sigma = Complex64::new(0.0, 2000.0);
    let base = eigenvalues(&config(sigma, 8));
    let moved = eigenvalues(&config(sigma * (1.0 + 1e-4), 8));
    // The outermost pair may swap with a neighbour; the inner ones may not.
    let mut inner = base.clone();
    inner.sort_by(|a, b| (a - sigma).norm().total_cmp(&(b - sigma).norm()));
    for z in &inner[..6] {
        assert!(nearest(*z, &moved) <= 1e-6, "{z} moved");
    }
}

#[test]
fn conjugate_shift_gives_conjugate_spectrum() {
    let sigma = Complex64::new(-5.0, 1500.0);
    let upper = eigenvalues(&config(sigma, 6));
    let lower = eigenvalues(&config(sigma.conj(), 6));
    assert_eq!(upper.len(), lower.len());
    for z in &upper {
        assert!(nearest(z.conj(), &lower) <= 1e-8, "no conjugate of {z}");
    }
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let cfg = config(Complex64::new(0.0, 1200.0), 6);
    let render = || {
        let mut report = run_solve(&cfg, 8).unwrap().report;
        report.timings = Default::default();
        let mut buf = Vec::new();
        write_json(&report, &mut buf).unwrap();
        buf
    };
    assert_eq!(render(), render());
}

#[test]
fn report_echoes_a_reparsable_config() {
    let cfg = config(Complex64::new(0.0, 1200.0), 6);
    let report = run_solve(&cfg, 8).unwrap().report;
    let echoed = serde_json::to_string(&report.config).unwrap();
    assert_eq!(RunConfig::from_json_str(&echoed).unwrap(), cfg);
    assert_eq!(
        report.shift,
        ComplexValue {
            re: 0.0,
            im: 1200.0
        }
    );
}

#[test]
fn viscous_pairs_decay_and_have_small_residuals() {
    let out = run_solve(&config(Complex64::new(0.0, 2500.0), 10), 8).unwrap();
    assert!(!out.report.pairs.is_empty());
    for p in &out.report.pairs {
        assert!(p.converged && p.residual <= 1e-8);
        assert!(p.lambda_re < 0.0 && !p.decay_violation);
    }
    // The mode localized in the almost inviscid air barely decays.
    assert!(out.report.pairs.iter().any(|p| p.lambda_re > -0.1));
}
