//! Koszul decomposition `P^l(X)^2 = G^l(X) ⊕ Gc^l(X)` with
//! `G^l = ∇P^{l+1}` and `Gc^l = (x - x_T)^⊥ P^{l-1}`, where
//! `y^⊥ a = a (-y_2, y_1)`.
//!
//! Vector polynomials are stored as coefficients in an orthonormal scalar
//! basis, `x` components first, so `L^2` products are Euclidean products and
//! the orthogonal projectors are `B B^T` for orthonormal column bases `B`.

use nalgebra::DMatrix;

use crate::basis::{dim_p2, Basis2d, Quadrature};
use crate::Point;

/// Koszul spaces on one polynomial domain (an element or one simplex).
#[derive(Debug, Clone)]
pub struct KoszulBlock {
    pub degree: usize,
    /// Orthonormal columns spanning `G^l`.
    pub g: DMatrix<f64>,
    /// Orthonormal columns spanning `Gc^l` (no columns when `l = 0`).
    pub gc: DMatrix<f64>,
    pub proj_g: DMatrix<f64>,
    pub proj_gc: DMatrix<f64>,
}

/// Koszul spaces on an element (one block) or on its submesh (one block per
/// simplex, the spaces being broken).
#[derive(Debug, Clone)]
pub struct KoszulSpaces {
    pub degree: usize,
    pub blocks: Vec<KoszulBlock>,
}

fn orthonormal_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return DMatrix::<f64>::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * smax)
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Builds `G^l` and `Gc^l` on the domain of `basis` (degree at least `l + 1`)
/// using `quad`, exact to degree `2 l + 1` at least.
pub fn koszul_block(basis: &Basis2d, quad: &Quadrature, l: usize, x_t: Point) -> KoszulBlock {
    assert!(basis.degree() > l, "basis degree must exceed the Koszul degree");
    let n = dim_p2(l);
    let n_grad = dim_p2(l + 1) - 1;
    let n_comp = if l == 0 { 0 } else { dim_p2(l - 1) };
    let mut gen_g = DMatrix::<f64>::zeros(2 * n, n_grad);
    let mut gen_gc = DMatrix::<f64>::zeros(2 * n, n_comp);
    for (p, w) in quad.points.iter().zip(&quad.weights) {
        let v = basis.eval(p);
        let (gx, gy) = basis.eval_grad(p);
        let (rx, ry) = (-(p.y - x_t.y), p.x - x_t.x);
        for i in 0..n {
            for j in 0..n_grad {
                gen_g[(i, j)] += w * gx[j + 1] * v[i];
                gen_g[(n + i, j)] += w * gy[j + 1] * v[i];
            }
            for j in 0..n_comp {
                gen_gc[(i, j)] += w * rx * v[j] * v[i];
                gen_gc[(n + i, j)] += w * ry * v[j] * v[i];
            }
        }
    }
    let g = orthonormal_columns(&gen_g);
    let gc = orthonormal_columns(&gen_gc);
    let proj_g = &g * g.transpose();
    let proj_gc = &gc * gc.transpose();
    KoszulBlock { degree: l, g, gc, proj_g, proj_gc }
}

impl KoszulBlock {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Rank of `[G | Gc]`; equals [`Self::dim`] when the sum is direct and
    /// fills `P^l(X)^2`.
    pub fn decomposition_rank(&self) -> usize {
        let both = DMatrix::from_fn(self.dim(), self.g.ncols() + self.gc.ncols(), |r, c| {
            if c < self.g.ncols() {
                self.g[(r, c)]
            } else {
                self.gc[(r, c - self.g.ncols())]
            }
        });
        both.rank(1e-10)
    }
}

impl KoszulSpaces {
    pub fn on_element(basis: &Basis2d, quad: &Quadrature, l: usize, x_t: Point) -> Self {
        Self { degree: l, blocks: vec![koszul_block(basis, quad, l, x_t)] }
    }

    pub fn on_submesh(bases: &[Basis2d], quads: &[Quadrature], l: usize, x_t: Point) -> Self {
        let blocks = bases.iter().zip(quads).map(|(b, q)| koszul_block(b, q, l, x_t)).collect();
        Self { degree: l, blocks }
    }

    pub fn dim_g(&self) -> usize {
        self.blocks.iter().map(|b| b.g.ncols()).sum()
    }

    pub fn dim_gc(&self) -> usize {
        self.blocks.iter().map(|b| b.gc.ncols()).sum()
    }

    pub fn decomposition_rank(&self) -> usize {
        self.blocks.iter().map(|b| b.decomposition_rank()).sum()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }
}
