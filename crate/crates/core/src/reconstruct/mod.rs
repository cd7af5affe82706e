//! Local HHO operators on one element: discrete divergence, the
//! divergence-preserving velocity reconstruction in the RTN space of the fan
//! submesh, and the unsteady form built on it.

mod rtn;

use nalgebra::{DMatrix, DVector};

pub use rtn::RtnSpace;

use crate::basis::{
    bilinear_degree, data_degree, dim_p2, element_basis, k_star, simplex_basis, Basis1d, Basis2d, Quadrature,
};
use crate::error::Result;
use crate::mesh::PolyMesh;
use crate::{Point, Vector};

/// Ordering of the local unknowns of one element: element velocity
/// (`x` then `y` components), then for each face in element order the `x`
/// and `y` components of the face velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalDofLayout {
    pub k: usize,
    pub k_star: usize,
    /// `dim P^{k*}(T)`.
    pub n_cell: usize,
    /// `dim P^k(F)`.
    pub n_face: usize,
    pub n_faces: usize,
}

impl LocalDofLayout {
    pub fn new(k: usize, n_faces: usize) -> Self {
        let ks = k_star(k);
        Self { k, k_star: ks, n_cell: dim_p2(ks), n_face: k + 1, n_faces }
    }

    pub fn n_elem_dofs(&self) -> usize {
        2 * self.n_cell
    }

    pub fn n_face_dofs(&self) -> usize {
        2 * self.n_face
    }

    pub fn total(&self) -> usize {
        self.n_elem_dofs() + self.n_faces * self.n_face_dofs()
    }

    pub fn n_pressure(&self) -> usize {
        dim_p2(self.k)
    }

    pub fn elem(&self, c: usize, j: usize) -> usize {
        c * self.n_cell + j
    }

    pub fn face(&self, f: usize, c: usize, j: usize) -> usize {
        self.n_elem_dofs() + f * self.n_face_dofs() + c * self.n_face + j
    }
}

/// Bases and rules of one element, shared by all its operators.
#[derive(Debug, Clone)]
pub struct ElementBases {
    pub element: usize,
    pub layout: LocalDofLayout,
    /// Orthonormal on `T`, degree `k + 1`; its leading functions span
    /// `P^{k*}(T)` and `P^k(T)`.
    pub cell: Basis2d,
    /// Degree `k`, in the frame of the global face.
    pub faces: Vec<Basis1d>,
    /// Orthonormal on each simplex, degree `k + 1`.
    pub simplices: Vec<Basis2d>,
    pub simplex_quads: Vec<Quadrature>,
    pub face_quads: Vec<Quadrature>,
    /// Higher-exactness rules for non-polynomial data.
    pub data_simplex_quads: Vec<Quadrature>,
    pub data_face_quads: Vec<Quadrature>,
    pub outward_normals: Vec<Vector>,
    pub face_diameters: Vec<f64>,
    pub center: Point,
    pub diameter: f64,
}

impl ElementBases {
    pub fn build(mesh: &PolyMesh, e: usize, k: usize, quad_bump: usize) -> Result<Self> {
        let el = &mesh.elements[e];
        let layout = LocalDofLayout::new(k, el.n_faces());
        let qd = bilinear_degree(k) + quad_bump;
        let cell = element_basis(el, e, k + 1)?;
        let faces = el
            .face_ids
            .iter()
            .map(|&f| Basis1d::new(k, mesh.faces[f].points[0], mesh.faces[f].points[1]))
            .collect();
        let simplices =
            el.submesh.triangles.iter().map(|t| simplex_basis(t, e, k + 1)).collect::<Result<Vec<_>>>()?;
        let simplex_quads = el
            .submesh
            .triangles
            .iter()
            .map(|t| Quadrature::triangle(qd, t.vertices))
            .collect::<Result<Vec<_>>>()?;
        let face_quads = el
            .face_ids
            .iter()
            .map(|&f| Quadrature::segment(qd, mesh.faces[f].points[0], mesh.faces[f].points[1]))
            .collect::<Result<Vec<_>>>()?;
        let dd = data_degree(k) + quad_bump;
        let data_simplex_quads = el
            .submesh
            .triangles
            .iter()
            .map(|t| Quadrature::triangle(dd, t.vertices))
            .collect::<Result<Vec<_>>>()?;
        let data_face_quads = el
            .face_ids
            .iter()
            .map(|&f| Quadrature::segment(dd, mesh.faces[f].points[0], mesh.faces[f].points[1]))
            .collect::<Result<Vec<_>>>()?;
        let outward_normals = (0..el.n_faces()).map(|i| el.outward_normal(mesh, i)).collect();
        let face_diameters = el.face_ids.iter().map(|&f| mesh.faces[f].length).collect();
        Ok(Self {
            element: e,
            layout,
            cell,
            faces,
            simplices,
            simplex_quads,
            face_quads,
            data_simplex_quads,
            data_face_quads,
            outward_normals,
            face_diameters,
            center: el.center,
            diameter: el.diameter,
        })
    }

    pub fn n_simplices(&self) -> usize {
        self.simplices.len()
    }

    /// `dim P^{k+1}(tau)`, the per-component size of reconstructed fields.
    pub fn n_simplex(&self) -> usize {
        dim_p2(self.layout.k + 1)
    }

    /// Element quadrature assembled from the simplex rules.
    pub fn cell_points(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.simplex_quads.iter().flat_map(|q| q.points.iter().zip(q.weights.iter().copied()))
    }

    /// Points and weights of the data rules on the whole element.
    pub fn data_points(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.data_simplex_quads.iter().flat_map(|q| q.points.iter().zip(q.weights.iter().copied()))
    }

    /// Interpolate `I_T^k v`: element dofs `pi_T^{k*} v`, face dofs `pi_F^k v`.
    pub fn interpolate(&self, v: &dyn Fn(&Point) -> Vector) -> DVector<f64> {
        let l = &self.layout;
        let mut out = DVector::zeros(l.total());
        for (p, w) in self.data_points() {
            let val = v(p);
            let phi = self.cell.eval(p);
            for j in 0..l.n_cell {
                out[l.elem(0, j)] += w * val.x * phi[j];
                out[l.elem(1, j)] += w * val.y * phi[j];
            }
        }
        for (f, quad) in self.data_face_quads.iter().enumerate() {
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let val = v(p);
                let chi = self.faces[f].eval(p);
                for j in 0..l.n_face {
                    out[l.face(f, 0, j)] += w * val.x * chi[j];
                    out[l.face(f, 1, j)] += w * val.y * chi[j];
                }
            }
        }
        out
    }

    /// Element velocity `v_T` at `p` from local dofs.
    pub fn eval_cell_velocity(&self, dofs: &DVector<f64>, p: &Point) -> Vector {
        let l = &self.layout;
        let phi = self.cell.eval(p);
        let mut v = Vector::zeros();
        for j in 0..l.n_cell {
            v.x += dofs[l.elem(0, j)] * phi[j];
            v.y += dofs[l.elem(1, j)] * phi[j];
        }
        v
    }

    /// Matrix mapping `P^n(T)` coefficients (`n = cols` leading functions of
    /// the cell basis) to `P^{k+1}(tau)` coefficients on every simplex.
    pub fn cell_to_simplices(&self, cols: usize) -> DMatrix<f64> {
        let ns = self.n_simplex();
        let mut e = DMatrix::<f64>::zeros(self.n_simplices() * ns, cols);
        for (t, (basis, quad)) in self.simplices.iter().zip(&self.simplex_quads).enumerate() {
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let psi = basis.eval(p);
                let phi = self.cell.eval(p);
                for i in 0..ns {
                    for j in 0..cols {
                        e[(t * ns + i, j)] += w * psi[i] * phi[j];
                    }
                }
            }
        }
        e
    }
}

/// Operators of the reconstruction layer on one element.
#[derive(Debug, Clone)]
pub struct ElementReconstruction {
    pub bases: ElementBases,
    /// `D_T^k`: local dofs to `P^k(T)` coefficients.
    pub divergence: DMatrix<f64>,
    /// `R_T^k`: local dofs to per-simplex `P^{k+1}(tau)^2` coefficients
    /// (simplex-major, then `x`/`y`).
    pub reconstruction: DMatrix<f64>,
    /// Matrix of `a_{R,T}`.
    pub unsteady: DMatrix<f64>,
    /// Matrix of the stabilization part `s_{R,T}` alone.
    pub unsteady_stabilization: DMatrix<f64>,
}

impl ElementReconstruction {
    pub fn build(mesh: &PolyMesh, e: usize, k: usize, quad_bump: usize) -> Result<Self> {
        let bases = ElementBases::build(mesh, e, k, quad_bump)?;
        let divergence = divergence_op(&bases);
        let rtn = RtnSpace::build(mesh, &bases)?;
        let reconstruction = rtn.reconstruct(&bases, &divergence)?;
        let (unsteady, unsteady_stabilization) = unsteady_form(&bases, &reconstruction);
        Ok(Self { bases, divergence, reconstruction, unsteady, unsteady_stabilization })
    }

    pub fn layout(&self) -> &LocalDofLayout {
        &self.bases.layout
    }

    /// Reconstructed velocity on simplex `tau` at `p`.
    pub fn eval_reconstruction(&self, coefs: &DVector<f64>, tau: usize, p: &Point) -> Vector {
        let ns = self.bases.n_simplex();
        let psi = self.bases.simplices[tau].eval(p);
        let off = tau * 2 * ns;
        Vector::new(psi.dot(&coefs.rows(off, ns)), psi.dot(&coefs.rows(off + ns, ns)))
    }
}

/// `D_T^k`: `int_T D v q = -int_T v_T . grad q + sum_F int_F (v_F . n_TF) q`.
pub fn divergence_op(b: &ElementBases) -> DMatrix<f64> {
    let l = &b.layout;
    let nk = dim_p2(l.k);
    let mut d = DMatrix::<f64>::zeros(nk, l.total());
    for (p, w) in b.cell_points() {
        let phi = b.cell.eval(p);
        let (gx, gy) = b.cell.eval_grad(p);
        for i in 0..nk {
            for j in 0..l.n_cell {
                d[(i, l.elem(0, j))] -= w * gx[i] * phi[j];
                d[(i, l.elem(1, j))] -= w * gy[i] * phi[j];
            }
        }
    }
    for (f, quad) in b.face_quads.iter().enumerate() {
        let n = b.outward_normals[f];
        for (p, w) in quad.points.iter().zip(&quad.weights) {
            let phi = b.cell.eval(p);
            let chi = b.faces[f].eval(p);
            for i in 0..nk {
                for j in 0..l.n_face {
                    d[(i, l.face(f, 0, j))] += w * n.x * phi[i] * chi[j];
                    d[(i, l.face(f, 1, j))] += w * n.y * phi[i] * chi[j];
                }
            }
        }
    }
    d
}

/// `a_{R,T}` and its stabilization part, from the reconstruction matrix.
fn unsteady_form(b: &ElementBases, r: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let l = &b.layout;
    let ns = b.n_simplex();
    let n = l.total();
    let mass = r.transpose() * r;

    // delta_T = pi_T^{k*}(R v) - v_T
    let embed = b.cell_to_simplices(l.n_cell);
    let mut delta_t = DMatrix::<f64>::zeros(2 * l.n_cell, n);
    for t in 0..b.n_simplices() {
        for c in 0..2 {
            let rows = r.rows(t * 2 * ns + c * ns, ns);
            let block = embed.rows(t * ns, ns).transpose() * rows;
            let mut target = delta_t.rows_mut(c * l.n_cell, l.n_cell);
            target += block;
        }
    }
    for c in 0..2 {
        for j in 0..l.n_cell {
            delta_t[(c * l.n_cell + j, l.elem(c, j))] -= 1.0;
        }
    }
    let mut stab = delta_t.transpose() * &delta_t;

    // delta_TF = pi_F^k(R v - v_F); face f is an edge of simplex f.
    for (f, quad) in b.face_quads.iter().enumerate() {
        let mut trace = DMatrix::<f64>::zeros(l.n_face, ns);
        for (p, w) in quad.points.iter().zip(&quad.weights) {
            let chi = b.faces[f].eval(p);
            let psi = b.simplices[f].eval(p);
            for j in 0..l.n_face {
                for i in 0..ns {
                    trace[(j, i)] += w * chi[j] * psi[i];
                }
            }
        }
        let mut delta_f = DMatrix::<f64>::zeros(2 * l.n_face, n);
        for c in 0..2 {
            let rows = r.rows(f * 2 * ns + c * ns, ns);
            let mut target = delta_f.rows_mut(c * l.n_face, l.n_face);
            target += &trace * rows;
            for j in 0..l.n_face {
                delta_f[(c * l.n_face + j, l.face(f, c, j))] -= 1.0;
            }
        }
        stab += delta_f.transpose() * &delta_f * b.face_diameters[f];
    }
    (mass + &stab, stab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_hexagonal;

    fn build(mesh: &PolyMesh, e: usize, k: usize) -> ElementReconstruction {
        ElementReconstruction::build(mesh, e, k, 0).unwrap()
    }

    fn cell_coefs(op: &ElementReconstruction, v: &DVector<f64>, deg: usize) -> DVector<f64> {
        op.divergence.rows(0, dim_p2(deg)) * v
    }

    #[test]
    fn layout_counts() {
        let l = LocalDofLayout::new(1, 4);
        assert_eq!(l.total(), 6 + 16);
        let l = LocalDofLayout::new(2, 6);
        assert_eq!(l.k_star, 3);
        assert_eq!(l.n_elem_dofs(), 20);
        assert_eq!(l.total(), 20 + 36);
    }

    #[test]
    fn divergence_of_radial_and_rotation_fields() {
        let mesh = generate_hexagonal(1);
        for k in 0..=2 {
            let op = build(&mesh, 5, k);
            let b = &op.bases;
            let v = b.interpolate(&|p: &Point| *p);
            let d = cell_coefs(&op, &v, k);
            // Constant 2 in the orthonormal basis: 2 sqrt|T| on phi_0.
            let area = mesh.elements[5].area;
            assert!((d[0] - 2.0 * area.sqrt()).abs() < 1e-12);
            assert!(d.rows(1, d.len() - 1).amax() < 1e-12);
            let rot = b.interpolate(&|p: &Point| Vector::new(-p.y, p.x));
            assert!((&op.divergence * rot).amax() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_reproduces_polynomials() {
        let mesh = generate_hexagonal(1);
        for k in 0..=2 {
            for e in [0, 5] {
                let op = build(&mesh, e, k);
                let f = |p: &Point| {
                    let q = p - Point::new(0.3, 0.4);
                    match k {
                        0 => Vector::new(1.5, -0.7),
                        1 => Vector::new(1.0 + q.x - 2.0 * q.y, 0.5 * q.x + q.y),
                        _ => Vector::new(q.x * q.y + q.y * q.y, q.x * q.x - 3.0 * q.x * q.y + q.x),
                    }
                };
                let v = op.bases.interpolate(&f);
                let r = &op.reconstruction * &v;
                for (t, quad) in op.bases.simplex_quads.iter().enumerate() {
                    for p in &quad.points {
                        let diff = op.eval_reconstruction(&r, t, p) - f(p);
                        assert!(diff.norm() < 1e-10, "k={k} e={e} diff={}", diff.norm());
                    }
                }
                let s = v.dot(&(&op.unsteady_stabilization * &v));
                assert!(s.abs() < 1e-20 + 1e-12 * v.norm_squared(), "stabilization {s}");
            }
        }
    }
}
