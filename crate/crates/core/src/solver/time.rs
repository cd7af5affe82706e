//! IMEX BDF2 time stepping: the convective transport is the extrapolation
//! `2 u^{n-1} - u^{n-2}`, everything else is implicit.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::forms::{convection::max_divergence, convection_assemble, ConvectionContext, FormMatrices};
use crate::mesh::PolyMesh;
use crate::solver::system::{GlobalSystem, SystemParams};
use crate::solver::DofMap;
use crate::{Point, Vector};

/// Discrete solution at the last two time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeState {
    /// `u^n` (global velocity dofs).
    pub velocity: DVector<f64>,
    /// `u^{n-1}`.
    pub previous: DVector<f64>,
    /// `p^n`, zero before the first step.
    pub pressure: DVector<f64>,
    pub time: f64,
    pub dt: f64,
    /// Index `n` of the current level.
    pub step: usize,
}

/// `u^0 = I_h u(t0)` and `u^1 = I_h u(t0 + dt)`.
pub fn initialize(
    forms: &FormMatrices,
    dofmap: &DofMap,
    u: &dyn Fn(&Point, f64) -> Vector,
    t0: f64,
    dt: f64,
) -> TimeState {
    let previous = dofmap.interpolate(forms, &|p| u(p, t0));
    let velocity = dofmap.interpolate(forms, &|p| u(p, t0 + dt));
    TimeState { velocity, previous, pressure: DVector::zeros(dofmap.n_pressure), time: t0 + dt, dt, step: 1 }
}

/// `a_{R,h}(u, .)` as a global vector.
pub fn apply_unsteady(forms: &FormMatrices, dofmap: &DofMap, u: &DVector<f64>) -> DVector<f64> {
    let locals: Vec<_> = dofmap.gather(u).iter().zip(&forms.elements).map(|(v, ef)| &ef.recon.unsteady * v).collect();
    dofmap.scatter(&locals)
}

pub struct Bdf2Stepper<'a> {
    pub system: GlobalSystem<'a>,
    pub dt: f64,
}

impl<'a> Bdf2Stepper<'a> {
    /// Stepper for `nu` and `dt`. Without `convection` the transport term is
    /// dropped (unsteady Stokes).
    pub fn new(
        mesh: &PolyMesh,
        forms: &'a FormMatrices,
        nu: f64,
        dt: f64,
        convection: bool,
        condense: bool,
    ) -> Result<Self> {
        let params = SystemParams { mass: 1.5 / dt, nu, convection, condense };
        Ok(Self { system: GlobalSystem::new(mesh, forms, params)?, dt })
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.system.dofmap
    }

    /// Local dofs of the transport `2 u^n - u^{n-1}` for the next step.
    pub fn transport(&self, state: &TimeState) -> Vec<DVector<f64>> {
        self.dofmap().gather(&(&state.velocity * 2.0 - &state.previous))
    }

    /// Advances by one step; `load` is `l_h(f(t^{n+1}), .)` as a global
    /// velocity vector.
    pub fn step(&self, state: TimeState, load: &DVector<f64>) -> Result<TimeState> {
        let forms = self.system.forms;
        let dofmap = self.dofmap();
        let blocks = if self.system.params.convection {
            let w = self.transport(&state);
            let div = max_divergence(forms, &w);
            let scale = w.iter().map(|v| v.amax()).fold(1.0, f64::max);
            if div > 1e-8 * scale {
                return Err(Error::ExtrapolantNotDivFree(div));
            }
            let ctx = ConvectionContext::new_unchecked(forms, w);
            Some(convection_assemble(forms, &ctx))
        } else {
            None
        };
        let hist = &state.velocity * 4.0 - &state.previous;
        let rhs_v = apply_unsteady(forms, dofmap, &hist) / (2.0 * self.dt) + load;
        let mut rhs = DVector::zeros(dofmap.system_size());
        rhs.rows_mut(0, dofmap.n_velocity).copy_from(&rhs_v);
        let x = self.system.solve(&rhs, blocks.as_ref())?;
        Ok(TimeState {
            velocity: x.rows(0, dofmap.n_velocity).into_owned(),
            previous: state.velocity,
            pressure: x.rows(dofmap.n_velocity, dofmap.n_pressure).into_owned(),
            time: state.time + self.dt,
            dt: self.dt,
            step: state.step + 1,
        })
    }
}

/// Stationary Stokes problem `nu a_h(u, v) + b_h(v, p) - b_h(u, q) = load`.
pub fn solve_stokes(
    mesh: &PolyMesh,
    forms: &FormMatrices,
    nu: f64,
    load: &DVector<f64>,
    condense: bool,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let params = SystemParams { mass: 0.0, nu, convection: false, condense };
    let system = GlobalSystem::new(mesh, forms, params)?;
    let d = &system.dofmap;
    let mut rhs = DVector::zeros(d.system_size());
    rhs.rows_mut(0, d.n_velocity).copy_from(load);
    let x = system.solve(&rhs, None)?;
    Ok((x.rows(0, d.n_velocity).into_owned(), x.rows(d.n_velocity, d.n_pressure).into_owned()))
}
