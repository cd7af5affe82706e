use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use hho_core::harness::{
    dissipativity_checks, penalty_zero_checks, pressure_robustness_check, property_suite, reports_to_table,
    run_convergence_study, StudyConfig,
};
use hho_core::mesh::{generate_cartesian, generate_hexagonal, load_mesh, MeshFormat};
use hho_core::solver::DofMap;

#[derive(Parser)]
#[command(name = "hho-flow", version, about = "HHO Navier-Stokes convergence studies on polygonal meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a manufactured-solution convergence study and write errors.csv.
    Study {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print size and regularity information for a poly-text mesh.
    MeshInfo {
        path: PathBuf,
        /// Face degree used for the unknown count.
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Run the operator property suite.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Study { config } => {
            let cfg = StudyConfig::from_file(&config).with_context(|| format!("reading {}", config.display()))?;
            let reports = run_convergence_study(&cfg)?;
            print!("{}", reports_to_table(&reports));
            println!("wrote {}", cfg.out_dir.join("errors.csv").display());
            Ok(reports.iter().all(|r| r.failure.is_none()))
        }
        Command::MeshInfo { path, k } => {
            let mesh = load_mesh(&path, MeshFormat::PolyText).with_context(|| format!("loading {}", path.display()))?;
            let (simplices, faces) = mesh.regularity_counts();
            let boundary = mesh.boundary_faces.len();
            println!("elements        {}", mesh.n_elements());
            println!("faces           {} ({} interior, {} boundary)", mesh.n_faces(), mesh.n_faces() - boundary, boundary);
            println!("vertices        {}", mesh.vertices.len());
            println!("h               {:.6e}", mesh.h);
            println!("area            {:.12}", mesh.total_area());
            println!("max faces/elem  {faces}");
            println!("max simplices   {simplices}");
            println!("ndof (k={k})      {}", DofMap::new(&mesh, k).n_dof());
            Ok(true)
        }
        Command::Verify { seed } => {
            let mut checks = property_suite(seed)?;
            checks.push(pressure_robustness_check(&generate_hexagonal(1), 1, 20, seed)?);
            checks.extend(dissipativity_checks(&generate_cartesian(4), 1, 50, seed)?);
            checks.extend(penalty_zero_checks(20, seed)?);
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", checks.len());
            Ok(failed == 0)
        }
    }
}
