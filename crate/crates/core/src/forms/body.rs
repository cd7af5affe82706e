//! Body-force form `l_h(phi, v) = int phi . R_h v`.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::forms::{ElementForms, FormMatrices};
use crate::{Point, Vector};

/// Local load vector of one element.
pub fn element_body_force(ef: &ElementForms, phi: &dyn Fn(&Point) -> Vector) -> DVector<f64> {
    let b = &ef.recon.bases;
    let ns = b.n_simplex();
    let mut moments = DVector::zeros(2 * b.n_simplices() * ns);
    for (t, quad) in b.data_simplex_quads.iter().enumerate() {
        for (p, w) in quad.points.iter().zip(&quad.weights) {
            let f = phi(p);
            let psi = b.simplices[t].eval(p);
            for i in 0..ns {
                moments[t * 2 * ns + i] += w * f.x * psi[i];
                moments[t * 2 * ns + ns + i] += w * f.y * psi[i];
            }
        }
    }
    ef.recon.reconstruction.tr_mul(&moments)
}

/// Local load vectors of all elements.
pub fn body_force_vectors(forms: &FormMatrices, phi: &(dyn Fn(&Point) -> Vector + Sync)) -> Vec<DVector<f64>> {
    forms.elements.par_iter().map(|ef| element_body_force(ef, phi)).collect()
}

/// `l_h(phi, v)` for local dofs `v` per element.
pub fn body_force(forms: &FormMatrices, phi: &(dyn Fn(&Point) -> Vector + Sync), v: &[DVector<f64>]) -> f64 {
    body_force_vectors(forms, phi).iter().zip(v).map(|(l, ve)| l.dot(ve)).sum()
}
