//! Gauss rules on segments and triangles.
//!
//! Triangle rules are collapsed (Duffy) tensor products of Gauss-Legendre
//! rules, with one extra point in the collapsed direction to absorb the
//! Jacobian. All weights are positive.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::Point;

/// Highest polynomial degree for which rules are constructed.
pub const MAX_DEGREE: usize = 40;

#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

struct ReferenceRules {
    /// Nodes and weights on [0, 1].
    segment: Vec<(f64, f64)>,
    /// Barycentric-free reference triangle (0,0), (1,0), (0,1): (r, s, w).
    triangle: Vec<(f64, f64, f64)>,
}

static RULES: [OnceLock<ReferenceRules>; MAX_DEGREE + 1] = [const { OnceLock::new() }; MAX_DEGREE + 1];

fn points_for(degree: usize) -> usize {
    degree / 2 + 1
}

fn reference(degree: usize) -> Result<&'static ReferenceRules> {
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(degree));
    }
    Ok(RULES[degree].get_or_init(|| {
        let n = NonZeroUsize::new(points_for(degree)).unwrap();
        let legendre = GaussLegendre::new(n);
        let segment = legendre
            .iter()
            .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect::<Vec<_>>();
        if degree <= 1 {
            let triangle = vec![(1.0 / 3.0, 1.0 / 3.0, 0.5)];
            return ReferenceRules { segment, triangle };
        }
        let collapsed = GaussLegendre::new(NonZeroUsize::new(n.get() + 1).unwrap());
        let mut triangle = Vec::with_capacity(n.get() * (n.get() + 1));
        for (b, wb) in collapsed.iter() {
            let s = 0.5 * (1.0 + b);
            for (a, wa) in legendre.iter() {
                let r = 0.5 * (1.0 + a) * (1.0 - s);
                triangle.push((r, s, wa * wb * (1.0 - s) / 4.0));
            }
        }
        ReferenceRules { segment, triangle }
    }))
}

impl Quadrature {
    /// Rule on the triangle with the given vertices, exact on polynomials of
    /// total degree `degree`.
    pub fn triangle(degree: usize, vertices: [Point; 3]) -> Result<Self> {
        let rules = reference(degree)?;
        let [a, b, c] = vertices;
        let e1 = b - a;
        let e2 = c - a;
        let jac = (e1.x * e2.y - e1.y * e2.x).abs();
        let mut points = Vec::with_capacity(rules.triangle.len());
        let mut weights = Vec::with_capacity(rules.triangle.len());
        for &(r, s, w) in &rules.triangle {
            points.push(a + e1 * r + e2 * s);
            weights.push(w * jac);
        }
        Ok(Self { points, weights, exactness: degree })
    }

    /// Rule on the segment `[a, b]`, exact on polynomials of degree `degree`.
    pub fn segment(degree: usize, a: Point, b: Point) -> Result<Self> {
        let rules = reference(degree)?;
        let len = (b - a).norm();
        let (points, weights) = rules
            .segment
            .iter()
            .map(|&(t, w)| (a + (b - a) * t, w * len))
            .unzip();
        Ok(Self { points, weights, exactness: degree })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Concatenates rules, e.g. the simplices of a submesh.
    pub fn concat(rules: impl IntoIterator<Item = Quadrature>) -> Self {
        let mut out = Quadrature { points: vec![], weights: vec![], exactness: usize::MAX };
        for q in rules {
            out.exactness = out.exactness.min(q.exactness);
            out.points.extend(q.points);
            out.weights.extend(q.weights);
        }
        if out.exactness == usize::MAX {
            out.exactness = 0;
        }
        out
    }

    pub fn integrate(&self, mut f: impl FnMut(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_triangle() -> [Point; 3] {
        [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]
    }

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn triangle_xy_moment() {
        let q = Quadrature::triangle(2, unit_triangle()).unwrap();
        let v = q.integrate(|p| p.x * p.y);
        assert!((v - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn degree_zero_is_single_point() {
        let tri = [Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.0, 3.0)];
        let q = Quadrature::triangle(0, tri).unwrap();
        assert_eq!(q.len(), 1);
        assert!((q.weights[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn segment_ninth_power() {
        let q = Quadrature::segment(9, Point::new(0.0, 0.0), Point::new(1.0, 0.0)).unwrap();
        let v = q.integrate(|p| p.x.powi(9));
        assert!((v - 0.1).abs() < 1e-15);
    }

    #[test]
    fn triangle_rules_exact_on_monomials() {
        // int_{unit triangle} x^a y^b = a! b! / (a + b + 2)!
        for degree in [1, 4, 7, 12, 20] {
            let q = Quadrature::triangle(degree, unit_triangle()).unwrap();
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let v = q.integrate(|p| p.x.powi(a as i32) * p.y.powi(b as i32));
                    assert!((v - exact).abs() < 1e-14, "deg {degree} x^{a} y^{b}: {v} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn rejects_unsupported_degree() {
        assert!(matches!(
            Quadrature::triangle(MAX_DEGREE + 1, unit_triangle()),
            Err(Error::UnsupportedDegree(_))
        ));
    }
}
