//! Global unknowns, saddle-point assembly with the zero-mean pressure
//! constraint, and the IMEX BDF2 time loop.

mod checkpoint;
mod dofmap;
mod linear;
mod system;
mod time;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_HEADER};
pub use dofmap::DofMap;
pub use linear::{solve_linear, Factorization, SparsePattern, RESIDUAL_TOLERANCE};
pub use system::{GlobalSystem, SystemParams};
pub use time::{apply_unsteady, initialize, solve_stokes, Bdf2Stepper, TimeState};
