//! Global forms assembled from element contributions: viscous `a_h`,
//! coupling `b_h`, body force `l_h` and convection `t_h`.

mod body;
pub mod convection;
mod viscous;

use nalgebra::DMatrix;
use rayon::prelude::*;

pub use body::{body_force, body_force_vectors, element_body_force};
pub use convection::{
    convection_assemble, jump_average, penalty_energy, trilinear, upwind_dissipation, ConvectionBlocks,
    ConvectionContext, PenaltyOperator, SigmaTrace,
};
pub use viscous::{
    gradient_reconstruction, norm_1h_matrix, potential_reconstruction, viscous_form, viscous_stabilization,
    VISCOUS_STABILIZATION_WEIGHT,
};

use crate::basis::{trilinear_degree, Tabulation, Quadrature};
use crate::error::Result;
use crate::mesh::PolyMesh;
use crate::reconstruct::ElementReconstruction;

/// All time-independent local operators of one element.
#[derive(Debug, Clone)]
pub struct ElementForms {
    pub recon: ElementReconstruction,
    /// `G_T^k`.
    pub gradient: DMatrix<f64>,
    /// `a_T`.
    pub viscous: DMatrix<f64>,
    /// `s_T` alone.
    pub viscous_stabilization: DMatrix<f64>,
    /// `b_T(v, q) = -int D_T v q` as a matrix from local velocity dofs to
    /// `P^k(T)` test coefficients.
    pub coupling: DMatrix<f64>,
    /// Matrix of `||.||_{1,T}^2`.
    pub norm_1h: DMatrix<f64>,
    /// Simplex bases tabulated with the trilinear rule.
    pub volume: Vec<Tabulation>,
    pub penalty: Option<PenaltyOperator>,
}

impl ElementForms {
    pub fn build(mesh: &PolyMesh, e: usize, k: usize, quad_bump: usize) -> Result<Self> {
        let recon = ElementReconstruction::build(mesh, e, k, quad_bump)?;
        let b = &recon.bases;
        let gradient = gradient_reconstruction(b);
        let (viscous, viscous_stabilization) = viscous_form(b, &gradient)?;
        let coupling = -&recon.divergence;
        let norm_1h = norm_1h_matrix(b);
        let deg = trilinear_degree(k) + quad_bump;
        let volume = b
            .simplices
            .iter()
            .zip(&mesh.elements[e].submesh.triangles)
            .map(|(basis, t)| Ok(basis.tabulate(&Quadrature::triangle(deg, t.vertices)?)))
            .collect::<Result<Vec<_>>>()?;
        let penalty = PenaltyOperator::build(b, &recon.reconstruction, &mesh.elements[e].submesh)?;
        Ok(Self { recon, gradient, viscous, viscous_stabilization, coupling, norm_1h, volume, penalty })
    }

    pub fn n_local(&self) -> usize {
        self.recon.layout().total()
    }
}

/// Local operators of every element plus the face data of the convective
/// interface terms.
#[derive(Debug, Clone)]
pub struct FormMatrices {
    pub k: usize,
    pub quad_bump: usize,
    pub elements: Vec<ElementForms>,
    /// Every interior simplicial face of the global submesh.
    pub sigmas: Vec<SigmaTrace>,
    /// Indices into `sigmas` of the faces lying on mesh faces.
    pub mesh_sigmas: Vec<usize>,
}

impl FormMatrices {
    pub fn build(mesh: &PolyMesh, k: usize, quad_bump: usize) -> Result<Self> {
        let elements = (0..mesh.n_elements())
            .into_par_iter()
            .map(|e| ElementForms::build(mesh, e, k, quad_bump))
            .collect::<Result<Vec<_>>>()?;
        let deg = trilinear_degree(k) + quad_bump;
        let sigmas = mesh
            .interior_simplicial_faces()
            .iter()
            .map(|s| SigmaTrace::build(s, [&elements[s.side1.0].recon, &elements[s.side2.0].recon], deg))
            .collect::<Result<Vec<_>>>()?;
        let mesh_sigmas = (0..sigmas.len()).filter(|&i| !sigmas[i].is_element_interior()).collect();
        Ok(Self { k, quad_bump, elements, sigmas, mesh_sigmas })
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }
}
