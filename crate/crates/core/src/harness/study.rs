//! Manufactured-solution runs and refinement studies.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use nalgebra::DVector;

use crate::error::Result;
use crate::forms::{body_force_vectors, FormMatrices};
use crate::harness::config::StudyConfig;
use crate::harness::errors::{eoc, velocity_l2, SharpAccumulator};
use crate::harness::ManufacturedSolution;
use crate::mesh::PolyMesh;
use crate::solver::{initialize, Bdf2Stepper, DofMap};
use crate::Point;

type M = ManufacturedSolution;

/// Parameters of one manufactured run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub k: usize,
    pub nu: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub quad_bump: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub ndof: usize,
    pub h: f64,
    pub err_linf_l2: f64,
    pub err_sharp: f64,
}

/// Load vectors of the four spatial profiles whose time-weighted sum is the
/// forcing: `f(t) = g' U - nu g lap U + g^2 (U . grad) U + g grad P`.
struct ForcingParts {
    profile: DVector<f64>,
    laplacian: DVector<f64>,
    advection: DVector<f64>,
    pressure: DVector<f64>,
}

impl ForcingParts {
    fn new(forms: &FormMatrices, dofmap: &DofMap) -> Self {
        let load = |f: &(dyn Fn(&Point) -> crate::Vector + Sync)| dofmap.scatter(&body_force_vectors(forms, f));
        Self {
            profile: load(&M::profile),
            laplacian: load(&M::profile_laplacian),
            advection: load(&M::profile_advection),
            pressure: load(&M::pressure_gradient_profile),
        }
    }

    fn at(&self, nu: f64, t: f64) -> DVector<f64> {
        let g = M::time_factor(t);
        &self.profile * M::time_factor_derivative(t) - &self.laplacian * (nu * g)
            + &self.advection * (g * g)
            + &self.pressure * g
    }
}

/// Runs the scheme on `mesh` from `t = 0` for `n_steps` steps and measures
/// the error against the interpolate of the exact velocity.
pub fn run_manufactured(mesh: &PolyMesh, params: &RunParams) -> Result<RunResult> {
    let forms = FormMatrices::build(mesh, params.k, params.quad_bump)?;
    run_with_forms(mesh, &forms, params)
}

pub fn run_with_forms(mesh: &PolyMesh, forms: &FormMatrices, params: &RunParams) -> Result<RunResult> {
    let RunParams { nu, dt, n_steps, .. } = *params;
    let stepper = Bdf2Stepper::new(mesh, forms, nu, dt, true, false)?;
    let dofmap = stepper.dofmap();
    let forcing = ForcingParts::new(forms, dofmap);
    let interp = dofmap.interpolate(forms, &M::profile);
    let error = |u: &DVector<f64>, t: f64| u - &interp * M::time_factor(t);

    let exact = M::new(nu);
    let mut state = initialize(forms, dofmap, &|p, t| exact.velocity(p, t), 0.0, dt);
    let mut linf = velocity_l2(dofmap, &error(&state.previous, 0.0)).max(velocity_l2(dofmap, &error(&state.velocity, dt)));
    let mut sharp = SharpAccumulator::new();
    while state.step < n_steps {
        let transport = stepper.transport(&state);
        let t_next = (state.step + 1) as f64 * dt;
        state = stepper.step(state, &forcing.at(nu, t_next))?;
        let e = error(&state.velocity, t_next);
        linf = linf.max(velocity_l2(dofmap, &e));
        sharp.add(forms, dofmap, nu, &e, Some(transport));
    }
    Ok(RunResult { ndof: dofmap.n_dof(), h: mesh.h, err_linf_l2: linf, err_sharp: sharp.finish(dt)? })
}

/// One row of a study: a (family, viscosity, mesh) run.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub family: String,
    pub mesh: String,
    pub nu: f64,
    pub k: usize,
    pub dt: f64,
    pub t_final: f64,
    pub ndof: usize,
    pub h: f64,
    pub err_linf_l2: f64,
    pub eoc_linf_l2: Option<f64>,
    pub err_sharp: f64,
    pub eoc_sharp: Option<f64>,
    pub wall_seconds: f64,
    /// `None` for a successful run, otherwise the error that aborted it.
    pub failure: Option<String>,
}

pub const CSV_HEADER: &str = "family,nu,ndof,h,err_linf_l2,eoc_linf_l2,err_sharp,eoc_sharp,wall_seconds";

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:.4}"))
}

pub fn reports_to_csv(reports: &[ErrorReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        writeln!(
            out,
            "{},{:e},{},{:.6e},{:.6e},{},{:.6e},{},{:.3}",
            r.family,
            r.nu,
            r.ndof,
            r.h,
            r.err_linf_l2,
            opt(r.eoc_linf_l2),
            r.err_sharp,
            opt(r.eoc_sharp),
            r.wall_seconds
        )
        .unwrap();
    }
    out
}

pub fn reports_to_table(reports: &[ErrorReport]) -> String {
    let mut out = format!(
        "{:<10} {:>8} {:>8} {:>10} {:>12} {:>7} {:>12} {:>7} {:>9}  {}\n",
        "family", "nu", "ndof", "h", "err_linf_l2", "eoc", "err_sharp", "eoc", "seconds", "status"
    );
    for r in reports {
        let eoc = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.2}"));
        writeln!(
            out,
            "{:<10} {:>8.0e} {:>8} {:>10.4e} {:>12.4e} {:>7} {:>12.4e} {:>7} {:>9.2}  {}",
            r.family,
            r.nu,
            r.ndof,
            r.h,
            r.err_linf_l2,
            eoc(r.eoc_linf_l2),
            r.err_sharp,
            eoc(r.eoc_sharp),
            r.wall_seconds,
            r.failure.as_deref().unwrap_or("ok")
        )
        .unwrap();
    }
    out
}

fn mesh_label(src: &crate::harness::config::MeshSource) -> String {
    use crate::harness::config::MeshSource::*;
    match src {
        Cartesian(n) => format!("cartesian-{n}"),
        Hexagonal(l) => format!("hexagonal-{l}"),
        File(p) => p.display().to_string(),
    }
}

/// Runs every (viscosity, mesh) pair of `cfg`. A failing run is recorded with
/// its error and NaN norms; orders of convergence link consecutive
/// successful runs only.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<ErrorReport>> {
    cfg.validate()?;
    let meshes: Vec<_> = cfg.meshes.iter().map(|m| m.load()).collect();
    let mut reports = Vec::new();
    for &nu in &cfg.nu_list {
        let mut block: Vec<ErrorReport> = Vec::new();
        for (src, mesh) in cfg.meshes.iter().zip(&meshes) {
            let start = Instant::now();
            let params = RunParams { k: cfg.k, nu, dt: cfg.dt, n_steps: cfg.n_steps(), quad_bump: cfg.quad_bump };
            let outcome = match mesh {
                Ok(mesh) => run_manufactured(mesh, &params).map(|r| (r, mesh)),
                Err(e) => Err(crate::Error::Config(e.to_string())),
            };
            let wall = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
            let mut report = ErrorReport {
                family: cfg.family.clone(),
                mesh: mesh_label(src),
                nu,
                k: cfg.k,
                dt: cfg.dt,
                t_final: cfg.t_final,
                ndof: 0,
                h: f64::NAN,
                err_linf_l2: f64::NAN,
                eoc_linf_l2: None,
                err_sharp: f64::NAN,
                eoc_sharp: None,
                wall_seconds: wall,
                failure: None,
            };
            match outcome {
                Ok((r, mesh)) => {
                    report.ndof = r.ndof;
                    report.h = mesh.h;
                    report.err_linf_l2 = r.err_linf_l2;
                    report.err_sharp = r.err_sharp;
                    if let Some(prev) = block.iter().rev().find(|p| p.failure.is_none()) {
                        let h = [prev.h, report.h];
                        report.eoc_linf_l2 = Some(eoc(&[prev.err_linf_l2, report.err_linf_l2], &h)[0]);
                        report.eoc_sharp = Some(eoc(&[prev.err_sharp, report.err_sharp], &h)[0]);
                    }
                }
                Err(e) => report.failure = Some(e.to_string()),
            }
            block.push(report);
        }
        reports.extend(block);
    }
    Ok(reports)
}

/// Runs the study, writes `errors.csv` to the output directory and returns
/// the reports.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<Vec<ErrorReport>> {
    let reports = run_study(cfg)?;
    write_csv(&cfg.out_dir, &reports)?;
    Ok(reports)
}

pub fn write_csv(dir: &Path, reports: &[ErrorReport]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("errors.csv"), reports_to_csv(reports))?;
    Ok(())
}
