//! Manufactured-solution convergence studies: error norms, orders of
//! convergence, configuration and the operator property suite.

mod config;
mod errors;
mod manufactured;
mod study;
mod verify;

pub use config::{MeshSource, StudyConfig};
pub use errors::{eoc, error_linf_l2, error_sharp, norm_1h_squared, velocity_l2, SharpAccumulator};
pub use manufactured::ManufacturedSolution;
pub use study::{
    reports_to_csv, reports_to_table, run_convergence_study, run_manufactured, run_study, run_with_forms,
    write_csv, ErrorReport, RunParams, RunResult, CSV_HEADER,
};
pub use verify::{
    dissipativity_checks, divergence_free_basis, penalty_zero_checks, pressure_robustness_check, property_suite,
    random_in_span, PropertyCheck, RandomField,
};
