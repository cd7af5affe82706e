//! Convective trilinear form: volume term on the reconstructed velocity,
//! upwind interface terms on every interior simplicial face of the global
//! submesh, and the element penalty on jumps of the scalar potential of the
//! projected advective derivative.

use nalgebra::{DMatrix, DVector};

use crate::basis::{dim_p2, Basis1d, Quadrature, Tabulation};
use crate::error::{Error, Result};
use crate::forms::FormMatrices;
use crate::mesh::{InteriorSimplicialFace, SubMesh};
use crate::potential::PotentialOperator;
use crate::reconstruct::{ElementBases, ElementReconstruction};
use crate::{Point, Vector};

/// Interior simplicial face with the traces of the reconstruction from both
/// sides tabulated at its quadrature nodes.
#[derive(Debug, Clone)]
pub struct SigmaTrace {
    /// `(element, simplex)` on the `tau1` and `tau2` sides.
    pub sides: [(usize, usize); 2],
    pub points: [Point; 2],
    /// Unit normal pointing out of `tau1`.
    pub normal: Vector,
    pub weights: Vec<f64>,
    /// `traces[s][c]`: component `c` of `R_T v` on side `s` at the nodes, as
    /// rows over the local dofs of the side's element.
    pub traces: [[DMatrix<f64>; 2]; 2],
}

impl SigmaTrace {
    pub fn build(sigma: &InteriorSimplicialFace, recon: [&ElementReconstruction; 2], degree: usize) -> Result<Self> {
        let quad = Quadrature::segment(degree, sigma.points[0], sigma.points[1])?;
        let sides = [sigma.side1, sigma.side2];
        let traces = [0, 1].map(|s| {
            let (_, tau) = sides[s];
            let b = &recon[s].bases;
            let ns = b.n_simplex();
            let values = b.simplices[tau].tabulate_values(&quad.points);
            [0, 1].map(|c| &values * recon[s].reconstruction.rows(tau * 2 * ns + c * ns, ns))
        });
        Ok(Self { sides, points: sigma.points, normal: sigma.normal, weights: quad.weights, traces })
    }

    /// Whether both sides belong to the same element.
    pub fn is_element_interior(&self) -> bool {
        self.sides[0].0 == self.sides[1].0
    }

    /// Values of `R v` on both sides at the nodes, per component.
    fn side_values(&self, v: &[DVector<f64>]) -> [[DVector<f64>; 2]; 2] {
        [0, 1].map(|s| [0, 1].map(|c| &self.traces[s][c] * &v[self.sides[s].0]))
    }
}

/// Penalty factor of one element: the jumps, on the interior simplicial
/// faces of its submesh, of `rho^k pi^{k-1} (e_d . grad) R_T v` for the two
/// coordinate directions `d`. The penalty for `w0 = (a, b)` is
/// `|(a mx + b my) v|^2`.
#[derive(Debug, Clone)]
pub struct PenaltyOperator {
    pub mx: DMatrix<f64>,
    pub my: DMatrix<f64>,
}

impl PenaltyOperator {
    /// `None` for `k = 0`, where the penalty vanishes identically.
    pub fn build(b: &ElementBases, reconstruction: &DMatrix<f64>, submesh: &SubMesh) -> Result<Option<Self>> {
        let k = b.layout.k;
        if k == 0 {
            return Ok(None);
        }
        let m = b.n_simplices();
        let ns = b.n_simplex();
        let nl = dim_p2(k - 1);
        let nk = dim_p2(k);
        let rho = PotentialOperator::build(&b.simplices, &b.simplex_quads, k - 1, b.center)?.matrix();

        // Broken P^{k-1} projection of the directional derivatives.
        let mut deriv = [DMatrix::<f64>::zeros(2 * m * nl, b.layout.total()), DMatrix::zeros(2 * m * nl, b.layout.total())];
        for t in 0..m {
            let mut dx = DMatrix::<f64>::zeros(nl, ns);
            let mut dy = DMatrix::<f64>::zeros(nl, ns);
            let quad = &b.simplex_quads[t];
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let psi = b.simplices[t].eval(p);
                let (gx, gy) = b.simplices[t].eval_grad(p);
                for i in 0..nl {
                    for j in 0..ns {
                        dx[(i, j)] += w * psi[i] * gx[j];
                        dy[(i, j)] += w * psi[i] * gy[j];
                    }
                }
            }
            for c in 0..2 {
                let r = reconstruction.rows(t * 2 * ns + c * ns, ns);
                deriv[0].rows_mut(t * 2 * nl + c * nl, nl).copy_from(&(&dx * r));
                deriv[1].rows_mut(t * 2 * nl + c * nl, nl).copy_from(&(&dy * r));
            }
        }

        // Jumps of the degree-k potential in an orthonormal basis of each face.
        let sfaces = &submesh.interior_sfaces;
        let mut jump = DMatrix::<f64>::zeros(sfaces.len() * (k + 1), m * nk);
        for (i, s) in sfaces.iter().enumerate() {
            let basis = Basis1d::new(k, s.points[0], s.points[1]);
            let quad = Quadrature::segment(2 * k + 2, s.points[0], s.points[1])?;
            let tau2 = s.tau2.ok_or(Error::NotInteriorFace(s.tau1))?;
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let chi = basis.eval(p);
                for (tau, sign) in [(s.tau1, 1.0), (tau2, -1.0)] {
                    let psi = b.simplices[tau].eval(p);
                    for j in 0..=k {
                        for a in 0..nk {
                            jump[(i * (k + 1) + j, tau * nk + a)] += sign * w * chi[j] * psi[a];
                        }
                    }
                }
            }
        }
        let jr = jump * rho;
        let [dx, dy] = deriv;
        Ok(Some(Self { mx: &jr * dx, my: &jr * dy }))
    }

    pub fn factor(&self, w0: Vector) -> DMatrix<f64> {
        &self.mx * w0.x + &self.my * w0.y
    }

    /// `sum_sigma int [[rho(..v)]] [[rho(..z)]]` as a matrix (rows: `z`).
    pub fn matrix(&self, w0: Vector) -> DMatrix<f64> {
        let f = self.factor(w0);
        f.transpose() * f
    }
}

/// Jump and average of a two-valued face polynomial (coefficients in a
/// common face basis). On a boundary face both equal the one-sided trace.
pub fn jump_average(first: &DVector<f64>, second: Option<&DVector<f64>>) -> (DVector<f64>, DVector<f64>) {
    match second {
        Some(s) => (first - s, (first + s) * 0.5),
        None => (first.clone(), first.clone()),
    }
}

/// Transport data for one evaluation of the convective form.
#[derive(Debug, Clone)]
pub struct ConvectionContext {
    /// Local dofs of the transport field per element.
    pub transport: Vec<DVector<f64>>,
    /// `R_T w` per element.
    pub reconstruction: Vec<DVector<f64>>,
    /// `pi_T^0 w_T` per element.
    pub mean: Vec<Vector>,
    /// `R_h w . n_sigma` at the nodes of every interior simplicial face.
    pub normal_flux: Vec<DVector<f64>>,
}

/// Largest `|D_T w|` over the elements, in `L^2(T)`.
pub fn max_divergence(forms: &FormMatrices, w: &[DVector<f64>]) -> f64 {
    forms.elements.iter().zip(w).map(|(ef, we)| (&ef.recon.divergence * we).norm()).fold(0.0, f64::max)
}

impl ConvectionContext {
    /// Fails with [`Error::TransportNotDivergenceFree`] when some `D_T w`
    /// exceeds `1e-8` (relative to the size of `w` when it is large).
    pub fn new(forms: &FormMatrices, transport: Vec<DVector<f64>>) -> Result<Self> {
        let div = max_divergence(forms, &transport);
        let scale = transport.iter().map(|w| w.amax()).fold(1.0, f64::max);
        if div > 1e-8 * scale {
            return Err(Error::TransportNotDivergenceFree(div));
        }
        Ok(Self::new_unchecked(forms, transport))
    }

    pub fn new_unchecked(forms: &FormMatrices, transport: Vec<DVector<f64>>) -> Self {
        let reconstruction: Vec<_> =
            forms.elements.iter().zip(&transport).map(|(ef, w)| &ef.recon.reconstruction * w).collect();
        let mean = forms
            .elements
            .iter()
            .zip(&transport)
            .map(|(ef, w)| {
                let b = &ef.recon.bases;
                let phi0 = b.cell.eval(&b.center)[0];
                Vector::new(w[b.layout.elem(0, 0)], w[b.layout.elem(1, 0)]) * phi0
            })
            .collect();
        let normal_flux = forms
            .sigmas
            .iter()
            .map(|s| {
                let w = &transport[s.sides[0].0];
                &s.traces[0][0] * w * s.normal.x + &s.traces[0][1] * w * s.normal.y
            })
            .collect();
        Self { transport, reconstruction, mean, normal_flux }
    }

    /// Context of the zero transport field, for which the form vanishes.
    pub fn zero(forms: &FormMatrices) -> Self {
        let transport = forms.elements.iter().map(|ef| DVector::zeros(ef.recon.layout().total())).collect();
        Self::new_unchecked(forms, transport)
    }
}

/// Matrices of `t_h(w, ., .)` (rows: test function `z`, columns: `v`).
#[derive(Debug, Clone)]
pub struct ConvectionBlocks {
    /// Per element, over its local dofs: volume term, interface terms on the
    /// faces inside the element, and the penalty.
    pub elements: Vec<DMatrix<f64>>,
    /// Per entry of [`FormMatrices::mesh_sigmas`], over the local dofs of
    /// the `tau1` element followed by those of the `tau2` element.
    pub faces: Vec<DMatrix<f64>>,
}

fn volume_block(tabs: &[Tabulation], recon: &DMatrix<f64>, rw: &DVector<f64>, ns: usize) -> DMatrix<f64> {
    let n = recon.ncols();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (t, tab) in tabs.iter().enumerate() {
        let ax = &tab.values * rw.rows(t * 2 * ns, ns);
        let ay = &tab.values * rw.rows(t * 2 * ns + ns, ns);
        let mut adv = DMatrix::<f64>::zeros(tab.n_points(), ns);
        for q in 0..tab.n_points() {
            for j in 0..ns {
                adv[(q, j)] = tab.weights[q] * (ax[q] * tab.dx[(q, j)] + ay[q] * tab.dy[(q, j)]);
            }
        }
        let kmat = tab.values.transpose() * adv;
        for c in 0..2 {
            let r = recon.rows(t * 2 * ns + c * ns, ns);
            out += r.transpose() * &kmat * r;
        }
    }
    out
}

/// Interface contribution of one simplicial face over the concatenated
/// dofs of its sides (a single copy when both sides share the element).
fn interface_block(s: &SigmaTrace, flux: &DVector<f64>) -> DMatrix<f64> {
    let shared = s.is_element_interior();
    let n1 = s.traces[0][0].ncols();
    let n2 = s.traces[1][0].ncols();
    let n = if shared { n1 } else { n1 + n2 };
    let nq = s.weights.len();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for c in 0..2 {
        let (q1, q2) = (&s.traces[0][c], &s.traces[1][c]);
        let (jump, avg) = if shared {
            (q1 - q2, (q1 + q2) * 0.5)
        } else {
            let mut j = DMatrix::<f64>::zeros(nq, n);
            j.columns_mut(0, n1).copy_from(q1);
            j.columns_mut(n1, n2).copy_from(&(-q2));
            let mut a = DMatrix::<f64>::zeros(nq, n);
            a.columns_mut(0, n1).copy_from(&(q1 * 0.5));
            a.columns_mut(n1, n2).copy_from(&(q2 * 0.5));
            (j, a)
        };
        let mut central = jump.clone();
        let mut upwind = jump.clone();
        for q in 0..nq {
            let w = s.weights[q];
            central.row_mut(q).scale_mut(-w * flux[q]);
            upwind.row_mut(q).scale_mut(0.5 * w * flux[q].abs());
        }
        out += avg.transpose() * central + jump.transpose() * upwind;
    }
    out
}

/// Penalty matrix of element `e` for the given context (zero for `k = 0`).
pub fn penalty_matrix(forms: &FormMatrices, ctx: &ConvectionContext, e: usize) -> DMatrix<f64> {
    let n = forms.elements[e].recon.layout().total();
    match &forms.elements[e].penalty {
        Some(p) => p.matrix(ctx.mean[e]),
        None => DMatrix::zeros(n, n),
    }
}

/// Assembles `t_h(w, ., .)` for the transport in `ctx`.
pub fn convection_assemble(forms: &FormMatrices, ctx: &ConvectionContext) -> ConvectionBlocks {
    let mut elements: Vec<DMatrix<f64>> = forms
        .elements
        .iter()
        .enumerate()
        .map(|(e, ef)| {
            let ns = ef.recon.bases.n_simplex();
            volume_block(&ef.volume, &ef.recon.reconstruction, &ctx.reconstruction[e], ns) + penalty_matrix(forms, ctx, e)
        })
        .collect();
    let mut faces = Vec::with_capacity(forms.mesh_sigmas.len());
    for (i, s) in forms.sigmas.iter().enumerate() {
        let block = interface_block(s, &ctx.normal_flux[i]);
        if s.is_element_interior() {
            elements[s.sides[0].0] += block;
        } else {
            faces.push(block);
        }
    }
    ConvectionBlocks { elements, faces }
}

/// `t_h(w, v, z)` from assembled blocks; `v` and `z` are local dofs per
/// element.
pub fn trilinear(forms: &FormMatrices, blocks: &ConvectionBlocks, v: &[DVector<f64>], z: &[DVector<f64>]) -> f64 {
    let mut total: f64 = blocks.elements.iter().enumerate().map(|(e, m)| z[e].dot(&(m * &v[e]))).sum();
    for (m, &i) in blocks.faces.iter().zip(&forms.mesh_sigmas) {
        let [(e1, _), (e2, _)] = forms.sigmas[i].sides;
        let cat = |x: &[DVector<f64>]| DVector::from_iterator(m.ncols(), x[e1].iter().chain(x[e2].iter()).copied());
        total += cat(z).dot(&(m * cat(v)));
    }
    total
}

/// `sum_sigma 1/2 int |R w . n| |[[R v]]|^2` over all interior simplicial
/// faces.
pub fn upwind_dissipation(forms: &FormMatrices, ctx: &ConvectionContext, v: &[DVector<f64>]) -> f64 {
    forms
        .sigmas
        .iter()
        .zip(&ctx.normal_flux)
        .map(|(s, flux)| {
            let vals = s.side_values(v);
            (0..s.weights.len())
                .map(|q| {
                    let jx = vals[0][0][q] - vals[1][0][q];
                    let jy = vals[0][1][q] - vals[1][1][q];
                    0.5 * s.weights[q] * flux[q].abs() * (jx * jx + jy * jy)
                })
                .sum::<f64>()
        })
        .sum()
}

/// `sum_T sum_sigma t_{T,sigma}(w, v, v)`.
pub fn penalty_energy(forms: &FormMatrices, ctx: &ConvectionContext, v: &[DVector<f64>]) -> f64 {
    forms
        .elements
        .iter()
        .enumerate()
        .filter_map(|(e, ef)| ef.penalty.as_ref().map(|p| (p.factor(ctx.mean[e]) * &v[e]).norm_squared()))
        .sum()
}

/// Jump of `R_h v` across interior simplicial face `sigma`, at its nodes,
/// per component.
pub fn reconstruction_jump(forms: &FormMatrices, sigma: usize, v: &[DVector<f64>]) -> [DVector<f64>; 2] {
    let s = &forms.sigmas[sigma];
    let vals = s.side_values(v);
    [&vals[0][0] - &vals[1][0], &vals[0][1] - &vals[1][1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jump_and_average() {
        let a = DVector::from_vec(vec![1.0, 0.5]);
        let b = DVector::from_vec(vec![-1.0, 0.5]);
        let (j, m) = jump_average(&a, Some(&b));
        assert_eq!(j, DVector::from_vec(vec![2.0, 0.0]));
        assert_eq!(m, DVector::from_vec(vec![0.0, 0.5]));
        let (js, ms) = jump_average(&b, Some(&a));
        assert_eq!(js, -j);
        assert_eq!(ms, m);
        let (jb, mb) = jump_average(&a, None);
        assert_eq!(jb, a);
        assert_eq!(mb, a);
        let (jc, mc) = jump_average(&a, Some(&a));
        assert_eq!(jc.amax(), 0.0);
        assert_eq!(mc, a);
    }
}
