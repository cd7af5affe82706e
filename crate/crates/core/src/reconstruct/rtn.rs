//! Raviart–Thomas–Nédélec space on the fan submesh of one element and the
//! local mixed problem defining the velocity reconstruction.

use nalgebra::DMatrix;

use crate::basis::{dim_p2, Basis1d, Quadrature};
use crate::error::{Error, Result};
use crate::mesh::PolyMesh;
use crate::reconstruct::ElementBases;
use crate::{Point, Vector};

/// Edge of a fan simplex as seen by the RTN degrees of freedom.
struct Edge {
    basis: Basis1d,
    normal: Vector,
    quad: Quadrature,
    /// First global dof of this edge.
    offset: usize,
}

/// `RTN^k` on the submesh of one element.
///
/// Degrees of freedom: the normal moments against an orthonormal `P^k`
/// basis on every simplicial face (interior faces first, then boundary
/// faces in element face order), then the interior moments of every simplex
/// against `P^{k-1}(tau)^2`. Interior face moments use the stored face
/// normal, so a single dof value fixes the normal trace on both sides.
#[derive(Debug, Clone)]
pub struct RtnSpace {
    pub k: usize,
    pub n_simplices: usize,
    /// Basis functions as per-simplex `P^{k+1}(tau)^2` coefficients, one
    /// column per dof.
    pub functions: DMatrix<f64>,
}

impl RtnSpace {
    pub fn n_dofs(&self) -> usize {
        self.functions.ncols()
    }

    pub fn interior_edge_dof(&self, sigma: usize, j: usize) -> usize {
        sigma * (self.k + 1) + j
    }

    pub fn boundary_edge_dof(&self, face: usize, j: usize) -> usize {
        (self.n_simplices + face) * (self.k + 1) + j
    }

    pub fn moment_dof(&self, tau: usize, j: usize) -> usize {
        2 * self.n_simplices * (self.k + 1) + tau * self.k * (self.k + 1) + j
    }

    pub fn build(mesh: &PolyMesh, b: &ElementBases) -> Result<Self> {
        let k = b.layout.k;
        let m = b.n_simplices();
        let el = &mesh.elements[b.element];
        let ns = b.n_simplex();
        let nk = dim_p2(k);
        let nkm1 = if k == 0 { 0 } else { dim_p2(k - 1) };
        let local = (k + 1) * (k + 3);
        let n_dofs = 2 * m * (k + 1) + m * k * (k + 1);
        let mut space = Self { k, n_simplices: m, functions: DMatrix::<f64>::zeros(2 * m * ns, n_dofs) };

        for t in 0..m {
            let tri = &el.submesh.triangles[t];
            let basis = &b.simplices[t];
            let quad = Quadrature::triangle(2 * k + 2, tri.vertices)?;
            let edges = [
                (el.submesh.interior_sfaces[t].clone(), space.interior_edge_dof(t, 0)),
                (el.submesh.boundary_sfaces[t].1[0].clone(), space.boundary_edge_dof(t, 0)),
                (el.submesh.interior_sfaces[(t + 1) % m].clone(), space.interior_edge_dof((t + 1) % m, 0)),
            ];
            let edges = edges
                .into_iter()
                .enumerate()
                .map(|(i, (s, offset))| {
                    let basis =
                        if i == 1 { b.faces[t].clone() } else { Basis1d::new(k, s.points[0], s.points[1]) };
                    Ok(Edge { basis, normal: s.normal, quad: Quadrature::segment(2 * k + 1, s.points[0], s.points[1])?, offset })
                })
                .collect::<Result<Vec<_>>>()?;

            // Spanning set (P^k)^2 + xi P^k_hom in the frame of the simplex.
            let center = basis.center();
            let scale = basis.scale();
            let span = |p: &Point| -> Vec<Vector> {
                let phi = basis.eval(p);
                let xi = (p - center) / scale;
                let mut out = Vec::with_capacity(local);
                for j in 0..nk {
                    out.push(Vector::new(phi[j], 0.0));
                    out.push(Vector::new(0.0, phi[j]));
                }
                for a in 0..=k {
                    let mono = xi.x.powi((k - a) as i32) * xi.y.powi(a as i32);
                    out.push(xi * mono);
                }
                out
            };

            let mut coefs = DMatrix::<f64>::zeros(2 * ns, local);
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let psi = basis.eval(p);
                for (s, f) in span(p).iter().enumerate() {
                    for i in 0..ns {
                        coefs[(i, s)] += w * f.x * psi[i];
                        coefs[(ns + i, s)] += w * f.y * psi[i];
                    }
                }
            }

            let mut dofs = DMatrix::<f64>::zeros(local, local);
            for (e, edge) in edges.iter().enumerate() {
                for (p, w) in edge.quad.points.iter().zip(&edge.quad.weights) {
                    let chi = edge.basis.eval(p);
                    for (s, f) in span(p).iter().enumerate() {
                        let fn_ = f.dot(&edge.normal);
                        for j in 0..=k {
                            dofs[(e * (k + 1) + j, s)] += w * fn_ * chi[j];
                        }
                    }
                }
            }
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let psi = basis.eval(p);
                for (s, f) in span(p).iter().enumerate() {
                    for j in 0..nkm1 {
                        dofs[(3 * (k + 1) + j, s)] += w * f.x * psi[j];
                        dofs[(3 * (k + 1) + nkm1 + j, s)] += w * f.y * psi[j];
                    }
                }
            }
            let inv = dofs.try_inverse().ok_or(Error::SingularGram { element: b.element })?;
            let nodal: DMatrix<f64> = coefs * inv;

            for (e, edge) in edges.iter().enumerate() {
                for j in 0..=k {
                    let col = edge.offset + j;
                    let src = nodal.column(e * (k + 1) + j);
                    let mut dst = space.functions.view_mut((t * 2 * ns, col), (2 * ns, 1));
                    dst += src;
                }
            }
            for j in 0..2 * nkm1 {
                let col = space.moment_dof(t, j);
                let src = nodal.column(3 * (k + 1) + j);
                space.functions.view_mut((t * 2 * ns, col), (2 * ns, 1)).copy_from(&src);
            }
        }
        Ok(space)
    }

    /// Solves the local mixed problem for every local unknown at once and
    /// returns the matrix of `R_T^k`.
    pub fn reconstruct(&self, b: &ElementBases, divergence: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let k = self.k;
        let l = &b.layout;
        let m = self.n_simplices;
        let ns = b.n_simplex();
        let nk = dim_p2(k);
        let nloc = l.total();

        let is_boundary = |d: usize| d >= m * (k + 1) && d < 2 * m * (k + 1);
        let free: Vec<usize> = (0..self.n_dofs()).filter(|&d| !is_boundary(d)).collect();
        let bnd: Vec<usize> = (0..self.n_dofs()).filter(|&d| is_boundary(d)).collect();
        let phi_f = self.functions.select_columns(&free);
        let phi_b = self.functions.select_columns(&bnd);

        // Boundary dofs: moments of v_F . n_TF in the face basis.
        let mut r_b = DMatrix::<f64>::zeros(bnd.len(), nloc);
        for f in 0..m {
            let n = b.outward_normals[f];
            for j in 0..=k {
                let row = f * (k + 1) + j;
                r_b[(row, l.face(f, 0, j))] = n.x;
                r_b[(row, l.face(f, 1, j))] = n.y;
            }
        }

        // Divergence of P^{k+1}(tau)^2 tested against P^k(tau), and
        // Koszul complement Gc^{k-1} generators (x - x_T)^perp P^{k-2}(tau).
        let n_theta = if k >= 2 { dim_p2(k - 2) } else { 0 };
        let mut div = DMatrix::<f64>::zeros(m * nk, 2 * m * ns);
        let mut theta = DMatrix::<f64>::zeros(2 * m * ns, m * n_theta);
        for t in 0..m {
            let basis = &b.simplices[t];
            for (p, w) in b.simplex_quads[t].points.iter().zip(&b.simplex_quads[t].weights) {
                let psi = basis.eval(p);
                let (gx, gy) = basis.eval_grad(p);
                for j in 0..nk {
                    for i in 0..ns {
                        div[(t * nk + j, t * 2 * ns + i)] += w * gx[i] * psi[j];
                        div[(t * nk + j, t * 2 * ns + ns + i)] += w * gy[i] * psi[j];
                    }
                }
                let rot = Vector::new(-(p.y - b.center.y), p.x - b.center.x);
                for j in 0..n_theta {
                    for i in 0..ns {
                        theta[(t * 2 * ns + i, t * n_theta + j)] += w * rot.x * psi[j] * psi[i];
                        theta[(t * 2 * ns + ns + i, t * n_theta + j)] += w * rot.y * psi[j] * psi[i];
                    }
                }
            }
        }

        // v_T and D_T v expressed on the simplices.
        let embed_cell = b.cell_to_simplices(l.n_cell);
        let mut v_t = DMatrix::<f64>::zeros(2 * m * ns, nloc);
        for t in 0..m {
            for c in 0..2 {
                for i in 0..ns {
                    for j in 0..l.n_cell {
                        v_t[(t * 2 * ns + c * ns + i, l.elem(c, j))] = embed_cell[(t * ns + i, j)];
                    }
                }
            }
        }
        let embed_k = b.cell_to_simplices(nk);
        let mut d_sim = DMatrix::<f64>::zeros(m * nk, nloc);
        for t in 0..m {
            let block = embed_k.view((t * ns, 0), (nk, nk)) * divergence;
            d_sim.rows_mut(t * nk, nk).copy_from(&block);
        }

        let nf = free.len();
        let np = m * nk;
        let nt = m * n_theta;
        let size = nf + np + nt;
        let div_f = &div * &phi_f;
        let div_b = &div * &phi_b;
        let th_f = theta.transpose() * &phi_f;
        let th_b = theta.transpose() * &phi_b;

        let mut s = DMatrix::<f64>::zeros(size, size);
        s.view_mut((0, 0), (nf, nf)).copy_from(&(phi_f.transpose() * &phi_f));
        s.view_mut((0, nf), (nf, np)).copy_from(&div_f.transpose());
        s.view_mut((nf, 0), (np, nf)).copy_from(&div_f);
        s.view_mut((0, nf + np), (nf, nt)).copy_from(&th_f.transpose());
        s.view_mut((nf + np, 0), (nt, nf)).copy_from(&th_f);

        let lifted = &phi_b * &r_b;
        let mut rhs = DMatrix::<f64>::zeros(size, nloc);
        rhs.rows_mut(0, nf).copy_from(&(phi_f.transpose() * (&v_t - &lifted)));
        rhs.rows_mut(nf, np).copy_from(&(&d_sim - &div_b * &r_b));
        rhs.rows_mut(nf + np, nt).copy_from(&(theta.transpose() * &v_t - &th_b * &r_b));

        // The system is symmetric with a one-dimensional kernel (constant
        // multiplier); solve in the eigenbasis, dropping that mode.
        let eig = nalgebra::SymmetricEigen::new(s.clone());
        let smax = eig.eigenvalues.amax();
        let keep: Vec<usize> = (0..size).filter(|&i| eig.eigenvalues[i].abs() > 1e-11 * smax).collect();
        let rank = keep.len();
        if rank + 1 < size {
            return Err(Error::SaddleSingular { element: b.element, rank, size });
        }
        let mut x = DMatrix::<f64>::zeros(size, nloc);
        for &i in &keep {
            let v = eig.eigenvectors.column(i);
            let coef = v.transpose() * &rhs / eig.eigenvalues[i];
            x += v * coef;
        }
        let residual = (&s * &x - &rhs).amax();
        if residual > 1e-9 * rhs.amax().max(1.0) {
            return Err(Error::SaddleSingular { element: b.element, rank, size });
        }
        Ok(&phi_f * x.rows(0, nf) + lifted)
    }
}
