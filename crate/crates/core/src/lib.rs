//! Hybrid high-order (HHO) discretization of the unsteady incompressible
//! Navier–Stokes equations on polygonal meshes.
//!
//! The velocity is reconstructed in a Raviart–Thomas–Nédélec space on a fan
//! submesh of every element, which makes the scheme pressure-robust, and the
//! convective term is stabilized by upwinding plus a jump penalty on a scalar
//! potential of the discrete advective derivative.
//!
//! Modules follow the pipeline: [`mesh`] → [`basis`] → [`reconstruct`] and
//! [`potential`] (local operators) → [`forms`] → [`solver`] → [`harness`].

pub mod basis;
pub mod error;
pub mod forms;
pub mod harness;
pub mod mesh;
pub mod potential;
pub mod reconstruct;
pub mod solver;

pub use error::{Error, Result};

pub type Point = nalgebra::Vector2<f64>;
pub type Vector = nalgebra::Vector2<f64>;
