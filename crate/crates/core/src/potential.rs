//! Scalar potential operator on broken vector polynomials of a submesh.
//!
//! For `q` in `P^l(T_h(T))^2`, the potential `rho q` lies in
//! `P^{l+1}(T_h(T))`, its broken gradient is
//! `Gamma_G (pi_G q - pi_G pi_Gc q)` with `Gamma_G = (Id - pi_G pi_Gc)^{-1}`,
//! and it vanishes at the star centre `x_T` on every simplex. Since the
//! Koszul spaces of a submesh are broken, every operator is block diagonal
//! over the simplices.

use nalgebra::{DMatrix, DVector};

use crate::basis::{dim_p2, koszul_block, Basis1d, Basis2d, KoszulBlock, Quadrature};
use crate::error::{Error, Result};
use crate::mesh::SimplicialFace;
use crate::Point;

#[derive(Debug, Clone)]
pub struct GammaOperators {
    /// `(Id - pi_G pi_Gc)^{-1}`.
    pub gamma_g: DMatrix<f64>,
    /// `(Id - pi_Gc pi_G)^{-1}`.
    pub gamma_gc: DMatrix<f64>,
    /// Spectral norm of `pi_G pi_Gc`.
    pub contraction: f64,
}

/// Inverts `Id - pi_G pi_Gc` and `Id - pi_Gc pi_G` on one Koszul block.
pub fn build_gamma(block: &KoszulBlock) -> Result<GammaOperators> {
    let n = block.dim();
    let pp = &block.proj_g * &block.proj_gc;
    let contraction = if n == 0 { 0.0 } else { pp.clone().svd(false, false).singular_values.max() };
    if contraction >= 1.0 - 1e-8 {
        return Err(Error::ContractionFailure { norm: contraction });
    }
    let id = DMatrix::<f64>::identity(n, n);
    let gamma_g = (&id - &pp).try_inverse().ok_or(Error::ContractionFailure { norm: contraction })?;
    let gamma_gc = (&id - &block.proj_gc * &block.proj_g)
        .try_inverse()
        .ok_or(Error::ContractionFailure { norm: contraction })?;
    Ok(GammaOperators { gamma_g, gamma_gc, contraction })
}

/// `sum_n (pi_G pi_Gc)^n`, truncated once the increment drops below `tol`.
pub fn neumann_gamma(block: &KoszulBlock, tol: f64) -> DMatrix<f64> {
    let n = block.dim();
    let pp = &block.proj_g * &block.proj_gc;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for _ in 0..10_000 {
        term = &pp * term;
        sum += &term;
        if term.amax() < tol {
            break;
        }
    }
    sum
}

/// Recovers `q` from its projections `b = pi_G q` and `c = pi_Gc q`.
pub fn recovery(block: &KoszulBlock, gammas: &GammaOperators, b: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
    &gammas.gamma_g * (b - &block.proj_g * c) + &gammas.gamma_gc * (c - &block.proj_gc * b)
}

/// Scalar broken polynomial on a submesh, one coefficient vector per simplex
/// in the simplex's orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialImage {
    pub degree: usize,
    pub coefs: Vec<DVector<f64>>,
}

impl PotentialImage {
    pub fn eval(&self, bases: &[Basis2d], tau: usize, p: &Point) -> f64 {
        let c = &self.coefs[tau];
        bases[tau].eval(p).rows(0, c.len()).dot(c)
    }
}

/// `rho^{l+1}` on the submesh of one element.
#[derive(Debug, Clone)]
pub struct PotentialOperator {
    pub degree: usize,
    pub koszul: Vec<KoszulBlock>,
    pub gammas: Vec<GammaOperators>,
    /// Per simplex: `P^l(tau)^2` coefficients to `P^{l+1}(tau)` coefficients.
    pub blocks: Vec<DMatrix<f64>>,
    /// Per simplex: `q` to the coefficients of `grad rho q` in `P^l(tau)^2`.
    pub gradient_blocks: Vec<DMatrix<f64>>,
}

impl PotentialOperator {
    /// `bases` must have degree at least `l + 1` and `quads` must be exact to
    /// degree `2 l + 2`.
    pub fn build(bases: &[Basis2d], quads: &[Quadrature], l: usize, x_t: Point) -> Result<Self> {
        let nl = dim_p2(l);
        let nl1 = dim_p2(l + 1);
        let mut koszul = Vec::new();
        let mut gammas = Vec::new();
        let mut blocks = Vec::new();
        let mut gradient_blocks = Vec::new();
        for (basis, quad) in bases.iter().zip(quads) {
            let kb = koszul_block(basis, quad, l, x_t);
            let gm = build_gamma(&kb)?;
            let grad = &gm.gamma_g * (&kb.proj_g - &kb.proj_g * &kb.proj_gc);

            // Gradients of the non-constant basis functions in P^l(tau)^2.
            let mut dphi = DMatrix::<f64>::zeros(2 * nl, nl1 - 1);
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let v = basis.eval(p);
                let (gx, gy) = basis.eval_grad(p);
                for i in 0..nl {
                    for j in 1..nl1 {
                        dphi[(i, j - 1)] += w * gx[j] * v[i];
                        dphi[(nl + i, j - 1)] += w * gy[j] * v[i];
                    }
                }
            }
            let pinv = dphi.clone().pseudo_inverse(1e-12).map_err(|_| Error::SingularGram { element: usize::MAX })?;
            let antider = &pinv * &grad;
            let residual = (&dphi * &antider - &grad).amax();
            if residual > 1e-9 * grad.amax().max(1.0) {
                return Err(Error::ContractionFailure { norm: residual });
            }
            // Shift so that the value at x_T vanishes.
            let at_vertex = basis.eval(&x_t);
            let mut rho = DMatrix::<f64>::zeros(nl1, 2 * nl);
            rho.rows_mut(1, nl1 - 1).copy_from(&antider);
            for c in 0..2 * nl {
                let val: f64 = (1..nl1).map(|j| at_vertex[j] * antider[(j - 1, c)]).sum();
                rho[(0, c)] = -val / at_vertex[0];
            }
            koszul.push(kb);
            gammas.push(gm);
            blocks.push(rho);
            gradient_blocks.push(grad);
        }
        Ok(Self { degree: l, koszul, gammas, blocks, gradient_blocks })
    }

    /// Size of the input space `P^l(T_h(T))^2`.
    pub fn input_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.ncols()).sum()
    }

    pub fn apply(&self, q: &DVector<f64>) -> PotentialImage {
        let mut off = 0;
        let mut coefs = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            coefs.push(b * q.rows(off, b.ncols()));
            off += b.ncols();
        }
        PotentialImage { degree: self.degree + 1, coefs }
    }

    /// Coefficients of `grad rho q` per simplex.
    pub fn apply_gradient(&self, q: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(q.len());
        let mut off = 0;
        for g in &self.gradient_blocks {
            out.rows_mut(off, g.ncols()).copy_from(&(g * q.rows(off, g.ncols())));
            off += g.ncols();
        }
        out
    }

    /// Block-diagonal matrix of the whole operator.
    pub fn matrix(&self) -> DMatrix<f64> {
        let rows: usize = self.blocks.iter().map(|b| b.nrows()).sum();
        let mut m = DMatrix::<f64>::zeros(rows, self.input_dim());
        let (mut r, mut c) = (0, 0);
        for b in &self.blocks {
            m.view_mut((r, c), b.shape()).copy_from(b);
            r += b.nrows();
            c += b.ncols();
        }
        m
    }
}

/// Jump `rho|tau1 - rho|tau2` across an interior simplicial face, as
/// coefficients in an orthonormal `P^{degree}(sigma)` basis.
pub fn potential_jump(img: &PotentialImage, bases: &[Basis2d], sigma: &SimplicialFace) -> Result<DVector<f64>> {
    let tau2 = sigma.tau2.ok_or(Error::NotInteriorFace(sigma.tau1))?;
    let face_basis = Basis1d::new(img.degree, sigma.points[0], sigma.points[1]);
    let quad = Quadrature::segment(2 * img.degree, sigma.points[0], sigma.points[1])?;
    let mut out = DVector::zeros(face_basis.dim());
    for (p, w) in quad.points.iter().zip(&quad.weights) {
        let jump = img.eval(bases, sigma.tau1, p) - img.eval(bases, tau2, p);
        out.axpy(w * jump, &face_basis.eval(p), 1.0);
    }
    Ok(out)
}
