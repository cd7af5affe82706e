//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::fmt::Display;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hho_core::harness::{
    dissipativity_checks, eoc, penalty_zero_checks, pressure_robustness_check, property_suite, run_manufactured,
    ManufacturedSolution, PropertyCheck, RunParams, RunResult,
};
use hho_core::mesh::{generate_cartesian, generate_hexagonal};
use hho_core::solver::DofMap;
use hho_core::{Point, Vector};

const DT: f64 = 1e-3;
const T_FINAL: f64 = 0.2;
const CONVERGENCE_MESHES: [usize; 4] = [4, 8, 16, 32];
const ROBUSTNESS_MESHES: [usize; 3] = [4, 8, 16];

const LINF_EOC_MIN: f64 = 2.5;
const SHARP_EOC_RANGE: (f64, f64) = (1.3, 1.8);
const ROBUSTNESS_REL: f64 = 0.05;
const PRESSURE_ROBUSTNESS_TOL: f64 = 1e-11;
const DT_HALVING_REL: f64 = 0.02;
const FORCING_REL: f64 = 1e-6;

struct Outcome {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(id: usize, name: &'static str, passed: bool, detail: impl Display) -> Self {
        let o = Self { id, name, passed, detail: detail.to_string() };
        println!("{} {:>2} {:<40} {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
        o
    }
}

fn run(n: usize, nu: f64, dt: f64) -> RunResult {
    let start = Instant::now();
    let params = RunParams { k: 1, nu, dt, n_steps: (T_FINAL / dt).round() as usize, quad_bump: 0 };
    let r = run_manufactured(&generate_cartesian(n), &params).unwrap_or_else(|e| panic!("n={n} nu={nu}: {e}"));
    eprintln!(
        "  cartesian n={n:<3} nu={nu:<6e} dt={dt:e} ndof={:<6} linf={:.4e} sharp={:.4e} ({:.1}s)",
        r.ndof,
        r.err_linf_l2,
        r.err_sharp,
        start.elapsed().as_secs_f64()
    );
    r
}

fn rates(runs: &[RunResult], pick: impl Fn(&RunResult) -> f64) -> Vec<f64> {
    let e: Vec<f64> = runs.iter().map(&pick).collect();
    let h: Vec<f64> = runs.iter().map(|r| r.h).collect();
    eoc(&e, &h)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
}

fn checks_outcome(id: usize, name: &'static str, checks: &[PropertyCheck]) -> Outcome {
    for c in checks {
        println!("        {c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    Outcome::new(id, name, failed == 0, format!("{} checks, {failed} failed", checks.len()))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// `du/dt - nu lap u + (u . grad) u + grad p` by central differences.
fn forcing_by_differences(m: &ManufacturedSolution, p: &Point, t: f64) -> Vector {
    let (h1, h2) = (1e-5, 1e-4);
    let ex = Vector::new(1.0, 0.0);
    let ey = Vector::new(0.0, 1.0);
    let u = |q: &Point| m.velocity(q, t);
    let dudt = (m.velocity(p, t + h1) - m.velocity(p, t - h1)) / (2.0 * h1);
    let dx = (u(&(p + ex * h1)) - u(&(p - ex * h1))) / (2.0 * h1);
    let dy = (u(&(p + ey * h1)) - u(&(p - ey * h1))) / (2.0 * h1);
    let lap = (u(&(p + ex * h2)) + u(&(p - ex * h2)) + u(&(p + ey * h2)) + u(&(p - ey * h2)) - u(p) * 4.0) / (h2 * h2);
    let gp = Vector::new(
        (m.pressure(&(p + ex * h1), t) - m.pressure(&(p - ex * h1), t)) / (2.0 * h1),
        (m.pressure(&(p + ey * h1), t) - m.pressure(&(p - ey * h1), t)) / (2.0 * h1),
    );
    let v = u(p);
    dudt - lap * m.nu + dx * v.x + dy * v.y + gp
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let mut out = Vec::new();

    eprintln!("convergence runs, nu = 1e-2");
    let conv: Vec<RunResult> = CONVERGENCE_MESHES.iter().map(|&n| run(n, 1e-2, DT)).collect();
    let linf = rates(&conv, |r| r.err_linf_l2);
    let sharp = rates(&conv, |r| r.err_sharp);
    let last_linf = *linf.last().unwrap();
    let last_sharp = *sharp.last().unwrap();
    out.push(Outcome::new(
        1,
        "L-inf(L2) EOC, cartesian, nu=1e-2",
        last_linf >= LINF_EOC_MIN,
        format!("eoc [{}], final {last_linf:.3} >= {LINF_EOC_MIN}", fmt_list(&linf)),
    ));
    out.push(Outcome::new(
        2,
        "sharp-norm EOC, cartesian, nu=1e-2",
        (SHARP_EOC_RANGE.0..=SHARP_EOC_RANGE.1).contains(&last_sharp),
        format!("eoc [{}], final {last_sharp:.3} in [{}, {}]", fmt_list(&sharp), SHARP_EOC_RANGE.0, SHARP_EOC_RANGE.1),
    ));

    eprintln!("robustness runs, nu = 1e-6 and 1e-10");
    let mut worst: f64 = 0.0;
    for &n in &ROBUSTNESS_MESHES {
        let (a, b) = (run(n, 1e-6, DT), run(n, 1e-10, DT));
        worst = worst.max(rel(a.err_linf_l2, b.err_linf_l2)).max(rel(a.err_sharp, b.err_sharp));
    }
    out.push(Outcome::new(
        3,
        "Reynolds-semi-robustness",
        worst <= ROBUSTNESS_REL,
        format!("max rel difference {worst:.3e} <= {ROBUSTNESS_REL}"),
    ));

    let hex = generate_hexagonal(1);
    let pr = pressure_robustness_check(&hex, 1, 20, 11).unwrap();
    out.push(Outcome::new(
        4,
        "pressure-robustness identity",
        pr.passed && hex.n_elements() == 16 && pr.tolerance <= PRESSURE_ROBUSTNESS_TOL,
        format!("{} elements, n={} worst={:.3e} tol={:e}", hex.n_elements(), pr.instances, pr.worst, pr.tolerance),
    ));

    let t = Instant::now();
    let suite = property_suite(2024).unwrap();
    let few = suite.iter().filter(|c| c.instances < 50 && !c.name.contains("dimensions")).count();
    let mut o = checks_outcome(5, "operator property suite", &suite);
    o.passed &= few == 0;
    o.detail = format!("{}, {few} with fewer than 50 instances, {:.1}s", o.detail, t.elapsed().as_secs_f64());
    out.push(o);

    let diss = dissipativity_checks(&generate_cartesian(4), 1, 50, 13).unwrap();
    out.push(checks_outcome(6, "convective dissipativity", &diss));

    let pen = penalty_zero_checks(20, 17).unwrap();
    out.push(checks_outcome(7, "penalty vanishing", &pen));

    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let m = ManufacturedSolution::new(1e-2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = Point::new(rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
        let t = rng.random_range(0.0..2.0);
        let exact = m.forcing(&p, t);
        let fd = forcing_by_differences(&m, &p, t);
        worst = worst.max((exact - fd).norm() / exact.norm().max(1.0));
    }
    out.push(Outcome::new(
        8,
        "forcing vs finite differences",
        worst <= FORCING_REL,
        format!("20 points, worst rel {worst:.3e} <= {FORCING_REL:e}"),
    ));

    eprintln!("time-step halving, n = 8");
    let half = run(8, 1e-2, DT / 2.0);
    let base = &conv[1];
    let d = rel(base.err_linf_l2, half.err_linf_l2).max(rel(base.err_sharp, half.err_sharp));
    out.push(Outcome::new(
        9,
        "time-step halving sanity",
        d <= DT_HALVING_REL,
        format!("max rel change {d:.3e} <= {DT_HALVING_REL}"),
    ));

    let ndof = DofMap::new(&generate_cartesian(10), 1).n_dof();
    out.push(Outcome::new(10, "N_dof bookkeeping", ndof == 1620, format!("cartesian n=10, k=1: {ndof} == 1620")));

    let failed: Vec<_> = out.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} of {} criteria passed in {:.0}s", out.len() - failed.len(), out.len(), start.elapsed().as_secs_f64());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
