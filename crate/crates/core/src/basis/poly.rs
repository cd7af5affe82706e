//! Orthonormal polynomial bases on segments and planar domains.
//!
//! Planar bases start from scaled monomials `((x - c) / h)^a ((y - c) / h)^b`
//! in graded order and are orthonormalized by two passes of a Cholesky
//! factorization of the Gram matrix. The change of basis is upper
//! triangular, so the first `dim_p2(l)` functions of a degree-`L` basis span
//! `P^l` for every `l <= L`.

use nalgebra::{DMatrix, DVector};

use crate::basis::Quadrature;
use crate::{Point, Vector};

/// Dimension of `P^l` in two variables.
pub fn dim_p2(l: usize) -> usize {
    (l + 1) * (l + 2) / 2
}

/// Dimension of `P^l` in one variable.
pub fn dim_p1(l: usize) -> usize {
    l + 1
}

/// Exponents `(a, b)` of the monomials of total degree at most `l`, graded.
pub fn monomial_exponents(l: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim_p2(l));
    for d in 0..=l {
        for j in 0..=d {
            out.push((d - j, j));
        }
    }
    out
}

/// Values (and optionally gradients) of a basis at the nodes of a rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// `values[(q, j)]` is basis function `j` at node `q`.
    pub values: DMatrix<f64>,
    pub dx: DMatrix<f64>,
    pub dy: DMatrix<f64>,
}

impl Tabulation {
    pub fn n_points(&self) -> usize {
        self.points.len()
    }
}

#[derive(Debug, Clone)]
pub struct Basis2d {
    center: Point,
    scale: f64,
    degree: usize,
    exps: Vec<(usize, usize)>,
    /// `phi_j = sum_i coef[(i, j)] m_i`, upper triangular.
    coef: DMatrix<f64>,
}

impl Basis2d {
    /// Orthonormal basis of `P^degree` with respect to the rule `quad`, which
    /// must integrate polynomials of degree `2 * degree` exactly. Returns
    /// `None` when the Gram matrix is not positive definite.
    pub fn orthonormal(degree: usize, center: Point, scale: f64, quad: &Quadrature) -> Option<Self> {
        let exps = monomial_exponents(degree);
        let n = exps.len();
        let mut basis = Self { center, scale, degree, exps, coef: DMatrix::identity(n, n) };
        for _ in 0..2 {
            let vals = basis.tabulate_values(&quad.points);
            let mut weighted = vals.clone();
            for (q, w) in quad.weights.iter().enumerate() {
                weighted.row_mut(q).scale_mut(*w);
            }
            let gram = vals.transpose() * weighted;
            let chol = gram.cholesky()?;
            let l_inv_t = chol.l().solve_lower_triangular(&DMatrix::identity(n, n))?.transpose();
            basis.coef = &basis.coef * l_inv_t;
        }
        Some(basis)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn powers(&self, p: &Point) -> (Vec<f64>, Vec<f64>) {
        let xi = (p.x - self.center.x) / self.scale;
        let eta = (p.y - self.center.y) / self.scale;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            px[i] = px[i - 1] * xi;
            py[i] = py[i - 1] * eta;
        }
        (px, py)
    }

    fn monomials(&self, p: &Point) -> DVector<f64> {
        let (px, py) = self.powers(p);
        DVector::from_iterator(self.dim(), self.exps.iter().map(|&(a, b)| px[a] * py[b]))
    }

    fn monomial_gradients(&self, p: &Point) -> (DVector<f64>, DVector<f64>) {
        let (px, py) = self.powers(p);
        let n = self.dim();
        let mut gx = DVector::zeros(n);
        let mut gy = DVector::zeros(n);
        for (i, &(a, b)) in self.exps.iter().enumerate() {
            if a > 0 {
                gx[i] = a as f64 * px[a - 1] * py[b] / self.scale;
            }
            if b > 0 {
                gy[i] = b as f64 * px[a] * py[b - 1] / self.scale;
            }
        }
        (gx, gy)
    }

    pub fn eval(&self, p: &Point) -> DVector<f64> {
        self.coef.tr_mul(&self.monomials(p))
    }

    pub fn eval_grad(&self, p: &Point) -> (DVector<f64>, DVector<f64>) {
        let (gx, gy) = self.monomial_gradients(p);
        (self.coef.tr_mul(&gx), self.coef.tr_mul(&gy))
    }

    /// Values of the basis at `points`, one row per point.
    pub fn tabulate_values(&self, points: &[Point]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.dim());
        for (q, p) in points.iter().enumerate() {
            m.row_mut(q).copy_from(&self.eval(p).transpose());
        }
        m
    }

    pub fn tabulate(&self, quad: &Quadrature) -> Tabulation {
        let n = self.dim();
        let nq = quad.len();
        let mut values = DMatrix::zeros(nq, n);
        let mut dx = DMatrix::zeros(nq, n);
        let mut dy = DMatrix::zeros(nq, n);
        for (q, p) in quad.points.iter().enumerate() {
            values.row_mut(q).copy_from(&self.eval(p).transpose());
            let (gx, gy) = self.eval_grad(p);
            dx.row_mut(q).copy_from(&gx.transpose());
            dy.row_mut(q).copy_from(&gy.transpose());
        }
        Tabulation { points: quad.points.clone(), weights: quad.weights.clone(), values, dx, dy }
    }
}

/// Scaled Legendre polynomials on a segment, orthonormal in `L^2`.
///
/// The parametrization is fixed by the segment endpoints, so two elements
/// sharing a face see the same basis.
#[derive(Debug, Clone)]
pub struct Basis1d {
    midpoint: Point,
    tangent: Vector,
    length: f64,
    degree: usize,
}

impl Basis1d {
    pub fn new(degree: usize, a: Point, b: Point) -> Self {
        let length = (b - a).norm();
        Self { midpoint: (a + b) * 0.5, tangent: (b - a) / length, length, degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn eval(&self, p: &Point) -> DVector<f64> {
        let s = 2.0 * (p - self.midpoint).dot(&self.tangent) / self.length;
        let mut out = DVector::zeros(self.dim());
        let (mut p0, mut p1) = (1.0, s);
        for j in 0..=self.degree {
            let pj = match j {
                0 => 1.0,
                1 => s,
                _ => {
                    let next = ((2 * j - 1) as f64 * s * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = next;
                    next
                }
            };
            out[j] = pj * ((2 * j + 1) as f64 / self.length).sqrt();
        }
        out
    }

    pub fn tabulate_values(&self, points: &[Point]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.dim());
        for (q, p) in points.iter().enumerate() {
            m.row_mut(q).copy_from(&self.eval(p).transpose());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> [Point; 3] {
        [Point::new(0.1, 0.2), Point::new(0.9, 0.3), Point::new(0.4, 1.1)]
    }

    fn gram(values: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
        let mut w = values.clone();
        for (q, wq) in weights.iter().enumerate() {
            w.row_mut(q).scale_mut(*wq);
        }
        values.transpose() * w
    }

    #[test]
    fn triangle_basis_is_orthonormal() {
        let quad = Quadrature::triangle(10, triangle()).unwrap();
        let b = Basis2d::orthonormal(4, Point::new(0.45, 0.5), 1.0, &quad).unwrap();
        let g = gram(&b.tabulate_values(&quad.points), &quad.weights);
        assert!((g - DMatrix::identity(15, 15)).amax() < 1e-12);
    }

    #[test]
    fn basis_is_hierarchical() {
        let quad = Quadrature::triangle(10, triangle()).unwrap();
        let big = Basis2d::orthonormal(3, Point::new(0.45, 0.5), 1.0, &quad).unwrap();
        let small = Basis2d::orthonormal(1, Point::new(0.45, 0.5), 1.0, &quad).unwrap();
        let p = Point::new(0.5, 0.5);
        let (vb, vs) = (big.eval(&p), small.eval(&p));
        for j in 0..3 {
            assert!((vb[j] - vs[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let quad = Quadrature::triangle(8, triangle()).unwrap();
        let b = Basis2d::orthonormal(3, Point::new(0.45, 0.5), 0.8, &quad).unwrap();
        let p = Point::new(0.37, 0.61);
        let eps = 1e-6;
        let (gx, gy) = b.eval_grad(&p);
        let fx = (b.eval(&(p + Vector::new(eps, 0.0))) - b.eval(&(p - Vector::new(eps, 0.0)))) / (2.0 * eps);
        let fy = (b.eval(&(p + Vector::new(0.0, eps))) - b.eval(&(p - Vector::new(0.0, eps)))) / (2.0 * eps);
        assert!((gx - fx).amax() < 1e-6);
        assert!((gy - fy).amax() < 1e-6);
    }

    #[test]
    fn legendre_face_basis_is_orthonormal() {
        let (a, b) = (Point::new(0.2, 0.1), Point::new(0.7, 0.9));
        let basis = Basis1d::new(4, a, b);
        let quad = Quadrature::segment(10, a, b).unwrap();
        let g = gram(&basis.tabulate_values(&quad.points), &quad.weights);
        assert!((g - DMatrix::identity(5, 5)).amax() < 1e-13);
    }

    #[test]
    fn dimensions() {
        assert_eq!(dim_p2(0), 1);
        assert_eq!(dim_p2(2), 6);
        assert_eq!(monomial_exponents(2), vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        assert_eq!(dim_p1(3), 4);
    }
}
