//! Discrete error norms and estimated orders of convergence.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::forms::{upwind_dissipation, ConvectionContext, FormMatrices};
use crate::solver::DofMap;

/// `||v_h||_{L^2}` of the element velocities (orthonormal bases).
pub fn velocity_l2(dofmap: &DofMap, v: &DVector<f64>) -> f64 {
    v.rows(0, dofmap.n_elem_velocity).norm()
}

/// `max_n ||e^n||_{L^2}` over an error history.
pub fn error_linf_l2(dofmap: &DofMap, history: &[DVector<f64>]) -> f64 {
    history.iter().map(|e| velocity_l2(dofmap, e)).fold(0.0, f64::max)
}

/// `||v_h||_{1,h}^2`.
pub fn norm_1h_squared(forms: &FormMatrices, dofmap: &DofMap, v: &DVector<f64>) -> f64 {
    dofmap.gather(v).iter().zip(&forms.elements).map(|(ve, ef)| ve.dot(&(&ef.norm_1h * ve))).sum()
}

/// Streaming evaluation of the energy-upwind norm
/// `sqrt(dt sum_{n>=2} [nu ||e^n||_{1,h}^2 + 1/2 sum_sigma int |R w^n . n| |[[R e^n]]|^2])`
/// with `w^n = 2 u^{n-1} - u^{n-2}`.
#[derive(Debug, Clone, Default)]
pub struct SharpAccumulator {
    sum: f64,
    steps: usize,
}

impl SharpAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the contribution of one level `n >= 2`; `transport` holds the
    /// local dofs of `w^n`, or `None` for the viscous part alone.
    pub fn add(
        &mut self,
        forms: &FormMatrices,
        dofmap: &DofMap,
        nu: f64,
        error: &DVector<f64>,
        transport: Option<Vec<DVector<f64>>>,
    ) {
        let mut term = nu * norm_1h_squared(forms, dofmap, error);
        if let Some(w) = transport {
            let ctx = ConvectionContext::new_unchecked(forms, w);
            term += upwind_dissipation(forms, &ctx, &dofmap.gather(error));
        }
        self.sum += term;
        self.steps += 1;
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn finish(&self, dt: f64) -> Result<f64> {
        if self.steps == 0 {
            return Err(Error::InsufficientHistory(self.steps + 1));
        }
        Ok((dt * self.sum).sqrt())
    }
}

/// Energy-upwind norm from the velocity history `u^0..u^N` and the error
/// history `e^0..e^N`. Needs `N >= 2`.
pub fn error_sharp(
    forms: &FormMatrices,
    dofmap: &DofMap,
    nu: f64,
    dt: f64,
    velocities: &[DVector<f64>],
    errors: &[DVector<f64>],
) -> Result<f64> {
    let levels = velocities.len().min(errors.len());
    if levels < 3 {
        return Err(Error::InsufficientHistory(levels.saturating_sub(1)));
    }
    let mut acc = SharpAccumulator::new();
    for n in 2..levels {
        let w = dofmap.gather(&(&velocities[n - 1] * 2.0 - &velocities[n - 2]));
        acc.add(forms, dofmap, nu, &errors[n], Some(w));
    }
    acc.finish(dt)
}

/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` for consecutive pairs.
pub fn eoc(errors: &[f64], h: &[f64]) -> Vec<f64> {
    errors
        .windows(2)
        .zip(h.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eoc_of_power_law() {
        let h = [0.5f64, 0.25, 0.125, 0.1];
        for alpha in [1.0, 1.5, 2.7] {
            let e: Vec<f64> = h.iter().map(|h| 3.0 * h.powf(alpha)).collect();
            for r in eoc(&e, &h) {
                assert!((r - alpha).abs() < 1e-10);
            }
        }
        assert!(eoc(&[1.0], &[1.0]).is_empty());
    }

    #[test]
    fn empty_history_is_rejected() {
        assert!(matches!(SharpAccumulator::new().finish(1.0), Err(Error::InsufficientHistory(_))));
    }
}
