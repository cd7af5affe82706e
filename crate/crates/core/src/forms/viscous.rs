//! Viscous and pressure-velocity coupling forms and the discrete `H^1`-like
//! norm, all element-local.

use nalgebra::DMatrix;

use crate::basis::dim_p2;
use crate::error::{Error, Result};
use crate::reconstruct::ElementBases;

/// `G_T^k`: local dofs to `P^k(T)^{2x2}` coefficients. Row block `2 c + d`
/// holds the derivative of velocity component `c` along direction `d`.
pub fn gradient_reconstruction(b: &ElementBases) -> DMatrix<f64> {
    let l = &b.layout;
    let nk = dim_p2(l.k);
    let mut g = DMatrix::<f64>::zeros(4 * nk, l.total());
    for (p, w) in b.cell_points() {
        let phi = b.cell.eval(p);
        let (gx, gy) = b.cell.eval_grad(p);
        for c in 0..2 {
            for i in 0..nk {
                for j in 0..l.n_cell {
                    g[(2 * c * nk + i, l.elem(c, j))] -= w * gx[i] * phi[j];
                    g[((2 * c + 1) * nk + i, l.elem(c, j))] -= w * gy[i] * phi[j];
                }
            }
        }
    }
    for (f, quad) in b.face_quads.iter().enumerate() {
        let n = b.outward_normals[f];
        for (p, w) in quad.points.iter().zip(&quad.weights) {
            let phi = b.cell.eval(p);
            let chi = b.faces[f].eval(p);
            for c in 0..2 {
                for i in 0..nk {
                    for j in 0..l.n_face {
                        let v = w * phi[i] * chi[j];
                        g[(2 * c * nk + i, l.face(f, c, j))] += v * n.x;
                        g[((2 * c + 1) * nk + i, l.face(f, c, j))] += v * n.y;
                    }
                }
            }
        }
    }
    g
}

/// `int_T grad phi_i . grad phi_j` over the first `n` cell basis functions.
fn cell_stiffness(b: &ElementBases, n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::<f64>::zeros(n, n);
    for (p, w) in b.cell_points() {
        let (gx, gy) = b.cell.eval_grad(p);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] += w * (gx[i] * gx[j] + gy[i] * gy[j]);
            }
        }
    }
    s
}

/// `int_F chi_j phi_i`: traces of the first `n` cell functions on face `f`
/// projected on the face basis.
fn face_trace(b: &ElementBases, f: usize, n: usize) -> DMatrix<f64> {
    let mut t = DMatrix::<f64>::zeros(b.layout.n_face, n);
    let quad = &b.face_quads[f];
    for (p, w) in quad.points.iter().zip(&quad.weights) {
        let phi = b.cell.eval(p);
        let chi = b.faces[f].eval(p);
        for j in 0..b.layout.n_face {
            for i in 0..n {
                t[(j, i)] += w * chi[j] * phi[i];
            }
        }
    }
    t
}

/// Velocity potential reconstruction `r_T^{k+1}`, component-wise elliptic
/// projection with the mean of `v_T`. Rows: `x` then `y` coefficients in
/// the full cell basis of degree `k + 1`.
pub fn potential_reconstruction(b: &ElementBases) -> Result<DMatrix<f64>> {
    let l = &b.layout;
    let nr = b.cell.dim();
    let stiff = cell_stiffness(b, nr);
    let inner = stiff.view((1, 1), (nr - 1, nr - 1)).into_owned();
    let chol = inner.cholesky().ok_or(Error::SingularGram { element: b.element })?;

    let mut out = DMatrix::<f64>::zeros(2 * nr, l.total());
    for c in 0..2 {
        // int grad v_T . grad phi_i + sum_F int (v_F - v_T) grad phi_i . n
        let mut rhs = DMatrix::<f64>::zeros(nr - 1, l.total());
        for i in 1..nr {
            for j in 0..l.n_cell {
                rhs[(i - 1, l.elem(c, j))] += stiff[(i, j)];
            }
        }
        for (f, quad) in b.face_quads.iter().enumerate() {
            let n = b.outward_normals[f];
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let phi = b.cell.eval(p);
                let (gx, gy) = b.cell.eval_grad(p);
                let chi = b.faces[f].eval(p);
                for i in 1..nr {
                    let dn = w * (gx[i] * n.x + gy[i] * n.y);
                    for j in 0..l.n_face {
                        rhs[(i - 1, l.face(f, c, j))] += dn * chi[j];
                    }
                    for j in 0..l.n_cell {
                        rhs[(i - 1, l.elem(c, j))] -= dn * phi[j];
                    }
                }
            }
        }
        let sol = chol.solve(&rhs);
        out.view_mut((c * nr + 1, 0), (nr - 1, l.total())).copy_from(&sol);
        out[(c * nr, l.elem(c, 0))] = 1.0;
    }
    Ok(out)
}

/// Least-squares face stabilization
/// `sum_F h_F^{-1} || pi_F^k (delta_TF - delta_T) ||^2_F` with
/// `delta_T = pi_T^{k*} r v - v_T` and `delta_TF = pi_F^k r v - v_F`.
pub fn viscous_stabilization(b: &ElementBases, r: &DMatrix<f64>) -> DMatrix<f64> {
    let l = &b.layout;
    let nr = b.cell.dim();
    let n = l.total();
    let mut s = DMatrix::<f64>::zeros(n, n);
    for f in 0..l.n_faces {
        let trace = face_trace(b, f, nr);
        for c in 0..2 {
            let rc = r.rows(c * nr, nr);
            let mut delta_t = rc.rows(0, l.n_cell).into_owned();
            for j in 0..l.n_cell {
                delta_t[(j, l.elem(c, j))] -= 1.0;
            }
            let mut diff = &trace * rc - trace.columns(0, l.n_cell) * delta_t;
            for j in 0..l.n_face {
                diff[(j, l.face(f, c, j))] -= 1.0;
            }
            s += diff.transpose() * diff / b.face_diameters[f];
        }
    }
    s
}

/// Scaling of `s_T` inside `a_T`. Weights near 1 leave the unsteady
/// velocity error pre-asymptotic on desk-scale meshes.
pub const VISCOUS_STABILIZATION_WEIGHT: f64 = 3.0;

/// Local viscous form `a_T = int G:G + s_T` and its stabilization part.
pub fn viscous_form(b: &ElementBases, gradient: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let r = potential_reconstruction(b)?;
    let s = viscous_stabilization(b, &r) * VISCOUS_STABILIZATION_WEIGHT;
    Ok((gradient.transpose() * gradient + &s, s))
}

/// Matrix of `||v_T||_{1,T}^2`.
pub fn norm_1h_matrix(b: &ElementBases) -> DMatrix<f64> {
    let l = &b.layout;
    let n = l.total();
    let stiff = cell_stiffness(b, l.n_cell);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for c in 0..2 {
        for i in 0..l.n_cell {
            for j in 0..l.n_cell {
                m[(l.elem(c, i), l.elem(c, j))] += stiff[(i, j)];
            }
        }
    }
    for (f, quad) in b.face_quads.iter().enumerate() {
        let h_inv = 1.0 / b.face_diameters[f];
        let mut mass = DMatrix::<f64>::zeros(l.n_cell, l.n_cell);
        for (p, w) in quad.points.iter().zip(&quad.weights) {
            let phi = b.cell.eval(p);
            for i in 0..l.n_cell {
                for j in 0..l.n_cell {
                    mass[(i, j)] += w * phi[i] * phi[j];
                }
            }
        }
        let trace = face_trace(b, f, l.n_cell);
        for c in 0..2 {
            for i in 0..l.n_cell {
                for j in 0..l.n_cell {
                    m[(l.elem(c, i), l.elem(c, j))] += h_inv * mass[(i, j)];
                }
            }
            for j in 0..l.n_face {
                m[(l.face(f, c, j), l.face(f, c, j))] += h_inv;
                for i in 0..l.n_cell {
                    m[(l.face(f, c, j), l.elem(c, i))] -= h_inv * trace[(j, i)];
                    m[(l.elem(c, i), l.face(f, c, j))] -= h_inv * trace[(j, i)];
                }
            }
        }
    }
    m
}
