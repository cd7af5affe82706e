use std::path::PathBuf;

use nalgebra::DVector;

use hho_core::forms::FormMatrices;
use hho_core::harness::{
    error_linf_l2, error_sharp, reports_to_csv, run_convergence_study, run_manufactured, run_study, RunParams,
    StudyConfig, CSV_HEADER,
};
use hho_core::mesh::{generate_cartesian, generate_hexagonal, write_poly_text};
use hho_core::solver::DofMap;
use hho_core::{Error, Point, Vector};

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hho-flow-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn broken_h1_norm_of_affine_interpolates() {
    // grad (2x + y, x - 3y) has squared Frobenius norm 15 on the unit square.
    let v = |p: &Point| Vector::new(2.0 * p.x + p.y, p.x - 3.0 * p.y);
    for mesh in [generate_cartesian(3), generate_hexagonal(1)] {
        let forms = FormMatrices::build(&mesh, 1, 0).unwrap();
        let total: f64 = forms
            .elements
            .iter()
            .map(|ef| {
                let i = ef.recon.bases.interpolate(&v);
                i.dot(&(&ef.norm_1h * &i))
            })
            .sum();
        assert!((total - 15.0).abs() < 1e-11, "{total}");
    }
}

#[test]
fn linf_l2_is_the_largest_element_norm() {
    let mesh = generate_cartesian(2);
    let d = DofMap::new(&mesh, 1);
    let mut history = vec![DVector::zeros(d.n_velocity); 3];
    history[1][0] = 3.0;
    history[1][1] = 4.0;
    history[2][2] = 2.0;
    // Face dofs do not enter the L2 norm.
    history[2][d.n_elem_velocity] = 100.0;
    assert_eq!(error_linf_l2(&d, &history), 5.0);
    assert_eq!(error_linf_l2(&d, &[]), 0.0);
}

#[test]
fn sharp_norm_of_frozen_error_without_transport() {
    let mesh = generate_cartesian(3);
    let forms = FormMatrices::build(&mesh, 1, 0).unwrap();
    let d = DofMap::new(&mesh, 1);
    let e = d.interpolate(&forms, &|p| Vector::new(p.x * (1.0 - p.x), p.y));
    let zero = DVector::zeros(d.n_velocity);
    let one: f64 = d.gather(&e).iter().zip(&forms.elements).map(|(v, ef)| v.dot(&(&ef.norm_1h * v))).sum();
    let (nu, dt, levels) = (0.1, 0.01, 6);
    let s = error_sharp(&forms, &d, nu, dt, &vec![zero.clone(); levels], &vec![e.clone(); levels]).unwrap();
    assert!((s * s - dt * (levels - 2) as f64 * nu * one).abs() < 1e-14);
    let short = error_sharp(&forms, &d, nu, dt, &[zero.clone(), zero], &[e.clone(), e]);
    assert!(matches!(short, Err(Error::InsufficientHistory(1))));
}

fn write_study(dir: &std::path::Path, extra: &str) -> PathBuf {
    let text = format!(
        "# short study\nfamily = cartesian\nmesh_files = 2, 4\nk = 1\nnu_list = 1e-2 1e-4\ndt = 1e-2\n\
         out_dir = out\ntiming = false\n{extra}"
    );
    let path = dir.join("study.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

fn study_config(dir: &std::path::Path) -> StudyConfig {
    StudyConfig::from_file(&write_study(dir, "t_final = 0.05\n")).unwrap()
}

#[test]
fn study_csv_is_deterministic() {
    let dir = scratch_dir("determinism");
    let cfg = study_config(&dir);
    assert_eq!(cfg.out_dir, dir.join("out"));
    let first = run_convergence_study(&cfg).unwrap();
    let written = std::fs::read_to_string(dir.join("out/errors.csv")).unwrap();
    let second = reports_to_csv(&run_study(&cfg).unwrap());
    assert_eq!(written, second);

    let lines: Vec<&str> = written.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1].split(',').nth(5), Some(""));
    assert!(lines[2].split(',').nth(5).unwrap().parse::<f64>().is_ok());
    assert!(first.iter().all(|r| r.failure.is_none() && r.wall_seconds == 0.0));
    assert_eq!(first[0].ndof, 52);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn study_records_failed_meshes_and_keeps_going() {
    let dir = scratch_dir("failure");
    std::fs::write(dir.join("hex.poly"), write_poly_text(&generate_hexagonal(1))).unwrap();
    let text = "family = hexagonal\nmesh_files = hex.poly missing.poly 2\nnu_list = 1e-2\ndt = 1e-2\nt_final = 0.03\n\
                out_dir = out\ntiming = false\n";
    std::fs::write(dir.join("study.cfg"), text).unwrap();
    let cfg = StudyConfig::from_file(&dir.join("study.cfg")).unwrap();
    let reports = run_study(&cfg).unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports[0].failure.is_none());
    assert!(reports[1].failure.is_some() && reports[1].err_linf_l2.is_nan());
    // The order of convergence skips the failed run.
    assert!(reports[2].failure.is_none() && reports[2].eoc_linf_l2.is_some());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn invalid_studies_are_rejected() {
    let dir = scratch_dir("invalid");
    for extra in ["t_final = 0.05\ncondense = true\n", "t_final = 0.01\n", "t_final = 0.05\nviscosity = 1\n"] {
        let path = write_study(&dir, extra);
        assert!(matches!(StudyConfig::from_file(&path), Err(Error::Config(_))), "{extra}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn raising_quadrature_exactness_leaves_errors_unchanged() {
    let mesh = generate_cartesian(4);
    let run = |bump| {
        run_manufactured(&mesh, &RunParams { k: 1, nu: 1e-2, dt: 1e-2, n_steps: 10, quad_bump: bump }).unwrap()
    };
    let (base, fine) = (run(0), run(3));
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    assert!(rel(base.err_linf_l2, fine.err_linf_l2) < 1e-6, "{} vs {}", base.err_linf_l2, fine.err_linf_l2);
    assert!(rel(base.err_sharp, fine.err_sharp) < 1e-6, "{} vs {}", base.err_sharp, fine.err_sharp);
}
