//! Polynomial spaces on elements, faces, simplices and submeshes, with the
//! `L^2`-orthogonal projector.

use nalgebra::DVector;

use crate::basis::{Basis1d, Basis2d, Quadrature};
use crate::error::{Error, Result};
use crate::mesh::{Element, Face, Simplex};
use crate::Point;

/// Function handed to [`PolySpace::project`].
pub enum Integrand<'a> {
    /// Arbitrary function, integrated with the space's default rule.
    Smooth(&'a dyn Fn(&Point) -> f64),
    /// Polynomial of the stated degree; projection is exact or fails.
    Polynomial { degree: usize, f: &'a dyn Fn(&Point) -> f64 },
}

impl Integrand<'_> {
    fn eval(&self, p: &Point) -> f64 {
        match self {
            Integrand::Smooth(f) | Integrand::Polynomial { f, .. } => f(p),
        }
    }
}

#[derive(Debug, Clone)]
enum Pieces {
    Planar(Basis2d),
    Segment(Basis1d),
    Broken(Vec<Basis2d>),
}

/// Scalar polynomial space with an orthonormal basis and the rules used to
/// integrate on its domain. Vector-valued spaces are handled component by
/// component.
#[derive(Debug, Clone)]
pub struct PolySpace {
    degree: usize,
    pieces: Pieces,
    /// One rule per piece (one for planar and segment spaces).
    quads: Vec<Quadrature>,
}

/// Union of the submesh rules of an element.
pub fn element_quadrature(el: &Element, degree: usize) -> Result<Quadrature> {
    let rules = el
        .submesh
        .triangles
        .iter()
        .map(|t| Quadrature::triangle(degree, t.vertices))
        .collect::<Result<Vec<_>>>()?;
    Ok(Quadrature::concat(rules))
}

/// Orthonormal basis of `P^degree(T)` centred at the star centre and scaled
/// by the element diameter.
pub fn element_basis(el: &Element, element_id: usize, degree: usize) -> Result<Basis2d> {
    let quad = element_quadrature(el, 2 * degree)?;
    Basis2d::orthonormal(degree, el.center, el.diameter, &quad).ok_or(Error::SingularGram { element: element_id })
}

/// Orthonormal basis of `P^degree(tau)` centred at the centroid.
pub fn simplex_basis(s: &Simplex, element_id: usize, degree: usize) -> Result<Basis2d> {
    let quad = Quadrature::triangle(2 * degree, s.vertices)?;
    Basis2d::orthonormal(degree, s.centroid, s.diameter, &quad).ok_or(Error::SingularGram { element: element_id })
}

impl PolySpace {
    pub fn element(el: &Element, element_id: usize, degree: usize, quad_degree: usize) -> Result<Self> {
        let basis = element_basis(el, element_id, degree)?;
        let quad = element_quadrature(el, quad_degree.max(2 * degree))?;
        Ok(Self { degree, pieces: Pieces::Planar(basis), quads: vec![quad] })
    }

    pub fn simplex(s: &Simplex, degree: usize, quad_degree: usize) -> Result<Self> {
        let basis = simplex_basis(s, usize::MAX, degree)?;
        let quad = Quadrature::triangle(quad_degree.max(2 * degree), s.vertices)?;
        Ok(Self { degree, pieces: Pieces::Planar(basis), quads: vec![quad] })
    }

    pub fn face(face: &Face, degree: usize, quad_degree: usize) -> Result<Self> {
        let basis = Basis1d::new(degree, face.points[0], face.points[1]);
        let quad = Quadrature::segment(quad_degree.max(2 * degree), face.points[0], face.points[1])?;
        Ok(Self { degree, pieces: Pieces::Segment(basis), quads: vec![quad] })
    }

    /// Broken space `P^degree` on the submesh of an element.
    pub fn submesh(el: &Element, element_id: usize, degree: usize, quad_degree: usize) -> Result<Self> {
        let mut bases = Vec::new();
        let mut quads = Vec::new();
        for s in &el.submesh.triangles {
            bases.push(simplex_basis(s, element_id, degree)?);
            quads.push(Quadrature::triangle(quad_degree.max(2 * degree), s.vertices)?);
        }
        Ok(Self { degree, pieces: Pieces::Broken(bases), quads })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        match &self.pieces {
            Pieces::Planar(b) => b.dim(),
            Pieces::Segment(b) => b.dim(),
            Pieces::Broken(bs) => bs.iter().map(|b| b.dim()).sum(),
        }
    }

    fn exactness(&self) -> usize {
        self.quads.iter().map(|q| q.exactness).min().unwrap_or(0)
    }

    /// Coefficients of the `L^2`-orthogonal projection of `f`.
    pub fn project(&self, f: Integrand<'_>) -> Result<DVector<f64>> {
        if let Integrand::Polynomial { degree, .. } = f {
            let supported = self.exactness().saturating_sub(self.degree);
            if degree > supported {
                return Err(Error::QuadratureDeficit { requested: degree, supported });
            }
        }
        let mut out = Vec::with_capacity(self.dim());
        let mut piece = |vals: &dyn Fn(&Point) -> DVector<f64>, quad: &Quadrature, n: usize| {
            let mut c = DVector::zeros(n);
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                c.axpy(w * f.eval(p), &vals(p), 1.0);
            }
            out.extend(c.iter().copied());
        };
        match &self.pieces {
            Pieces::Planar(b) => piece(&|p| b.eval(p), &self.quads[0], b.dim()),
            Pieces::Segment(b) => piece(&|p| b.eval(p), &self.quads[0], b.dim()),
            Pieces::Broken(bs) => {
                for (b, q) in bs.iter().zip(&self.quads) {
                    piece(&|p| b.eval(p), q, b.dim());
                }
            }
        }
        Ok(DVector::from_vec(out))
    }

    /// Evaluates the polynomial with coefficients `c` at `p`. On a broken
    /// space `piece` selects the simplex.
    pub fn eval(&self, c: &DVector<f64>, piece: usize, p: &Point) -> f64 {
        match &self.pieces {
            Pieces::Planar(b) => b.eval(p).dot(c),
            Pieces::Segment(b) => b.eval(p).dot(c),
            Pieces::Broken(bs) => {
                let offset: usize = bs[..piece].iter().map(|b| b.dim()).sum();
                let n = bs[piece].dim();
                bs[piece].eval(p).dot(&c.rows(offset, n))
            }
        }
    }

    /// `L^2` norm of `f - sum c_j phi_j` with the space's rule.
    pub fn l2_distance(&self, c: &DVector<f64>, f: &dyn Fn(&Point) -> f64) -> f64 {
        let mut acc = 0.0;
        for (i, quad) in self.quads.iter().enumerate() {
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let d = f(p) - self.eval(c, i, p);
                acc += w * d * d;
            }
        }
        acc.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_cartesian;

    #[test]
    fn affine_field_is_reproduced() {
        let mesh = generate_cartesian(3);
        let el = &mesh.elements[4];
        let space = PolySpace::element(el, 4, 1, 4).unwrap();
        let f = |p: &Point| 3.0 * p.x + 2.0 * p.y;
        let c = space.project(Integrand::Polynomial { degree: 1, f: &f }).unwrap();
        assert!(space.l2_distance(&c, &f) < 1e-14);
        let p = Point::new(0.4, 0.5);
        assert!((space.eval(&c, 0, &p) - f(&p)).abs() < 1e-13);
    }

    #[test]
    fn segment_projection_of_square() {
        let mesh = generate_cartesian(1);
        // Bottom face runs from (0, 0) to (1, 0).
        let face = mesh.faces.iter().find(|f| f.midpoint.y == 0.0).unwrap();
        let space = PolySpace::face(face, 1, 4).unwrap();
        let f = |p: &Point| p.x * p.x;
        let c = space.project(Integrand::Polynomial { degree: 2, f: &f }).unwrap();
        for x in [0.0, 0.3, 1.0] {
            let p = Point::new(x, 0.0);
            assert!((space.eval(&c, 0, &p) - (x - 1.0 / 6.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn deficient_rule_is_reported() {
        let mesh = generate_cartesian(1);
        let space = PolySpace::element(&mesh.elements[0], 0, 1, 2).unwrap();
        let f = |p: &Point| p.x.powi(5);
        assert!(matches!(
            space.project(Integrand::Polynomial { degree: 5, f: &f }),
            Err(Error::QuadratureDeficit { .. })
        ));
    }

    #[test]
    fn broken_space_dimension() {
        let mesh = generate_cartesian(1);
        let space = PolySpace::submesh(&mesh.elements[0], 0, 2, 4).unwrap();
        assert_eq!(space.dim(), 4 * 6);
    }

    #[test]
    fn projection_error_decays_quadratically() {
        let f = |p: &Point| (std::f64::consts::PI * p.x).sin();
        let err = |n: usize| {
            let mesh = generate_cartesian(n);
            mesh.elements
                .iter()
                .enumerate()
                .map(|(i, el)| {
                    let s = PolySpace::element(el, i, 1, 8).unwrap();
                    let c = s.project(Integrand::Smooth(&f)).unwrap();
                    s.l2_distance(&c, &f).powi(2)
                })
                .sum::<f64>()
                .sqrt()
        };
        let rate = (err(4) / err(8)).log2();
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
    }
}
