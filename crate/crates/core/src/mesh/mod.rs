//! Polygonal meshes with a fan submesh per element.
//!
//! Every element stores a matching simplicial submesh whose triangles share
//! the vertex mean `x_T` of the element. Face normals are owned by the
//! lower-indexed adjacent element; simplicial faces inside an element carry a
//! fixed `(tau1, tau2)` ordering with `n_sigma` pointing out of `tau1`.

mod generate;
mod io;
mod submesh;

use std::collections::HashMap;

pub use generate::{generate_cartesian, generate_hexagonal, hexagonal_grid};
pub use io::{load_mesh, parse_poly_text, write_poly_text, MeshFormat};
pub use submesh::{build_submesh, Simplex, SimplicialFace, SubMesh};

use crate::error::{Error, Result};
use crate::{Point, Vector};

#[derive(Debug, Clone)]
pub struct Face {
    /// Endpoint ids, ordered along the boundary loop of the owning element.
    pub vertices: [usize; 2],
    pub points: [Point; 2],
    /// Owner (lower index) and, for interior faces, the neighbour.
    pub elements: (usize, Option<usize>),
    /// Unit normal pointing out of the owner.
    pub normal: Vector,
    pub length: f64,
    pub midpoint: Point,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.elements.1.is_none()
    }

    pub fn diameter(&self) -> f64 {
        self.length
    }

    pub fn tangent(&self) -> Vector {
        (self.points[1] - self.points[0]) / self.length
    }
}

#[derive(Debug, Clone)]
pub struct Element {
    pub vertex_ids: Vec<usize>,
    /// Face `i` joins vertices `i` and `i + 1` of the boundary loop.
    pub face_ids: Vec<usize>,
    /// `+1` when the stored face normal points out of this element.
    pub face_signs: Vec<f64>,
    pub diameter: f64,
    pub area: f64,
    /// Star centre (vertex mean), the common vertex of the submesh.
    pub center: Point,
    pub submesh: SubMesh,
}

impl Element {
    pub fn n_faces(&self) -> usize {
        self.face_ids.len()
    }

    /// Outward unit normal `n_TF` for the `i`-th face of the element.
    pub fn outward_normal(&self, mesh: &PolyMesh, i: usize) -> Vector {
        mesh.faces[self.face_ids[i]].normal * self.face_signs[i]
    }
}

#[derive(Debug, Clone)]
pub struct PolyMesh {
    pub vertices: Vec<Point>,
    pub elements: Vec<Element>,
    pub faces: Vec<Face>,
    pub boundary_faces: Vec<usize>,
    pub h: f64,
}

/// One interior simplicial face of the global submesh, either inside an
/// element or on a mesh face shared by two elements.
#[derive(Debug, Clone, Copy)]
pub struct InteriorSimplicialFace {
    /// `(element, simplex)` on the `tau1` side.
    pub side1: (usize, usize),
    pub side2: (usize, usize),
    pub points: [Point; 2],
    pub normal: Vector,
    pub length: f64,
    /// Index into the element's interior simplicial faces, or `None` for a
    /// mesh face.
    pub local: Option<usize>,
}

fn polygon_area(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let a = points[i];
            let b = points[(i + 1) % n];
            a.x * b.y - a.y * b.x
        })
        .sum::<f64>()
        * 0.5
}

fn polygon_diameter(points: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

impl PolyMesh {
    /// Builds a mesh from counter-clockwise vertex loops, deriving faces and
    /// validating the topology and star-shapedness of every element.
    pub fn from_polygons(vertices: Vec<Point>, polygons: Vec<Vec<usize>>) -> Result<Self> {
        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut elements = Vec::with_capacity(polygons.len());

        for (e, poly) in polygons.into_iter().enumerate() {
            if poly.len() < 3 {
                return Err(Error::Topology(format!("element {e} has fewer than 3 vertices")));
            }
            if let Some(&bad) = poly.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Topology(format!("element {e} references missing vertex {bad}")));
            }
            let mut sorted = poly.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != poly.len() {
                return Err(Error::Topology(format!("element {e} repeats a vertex")));
            }
            let pts: Vec<Point> = poly.iter().map(|&v| vertices[v]).collect();
            let area = polygon_area(&pts);
            if area <= 0.0 {
                return Err(Error::Topology(format!("element {e} is not counter-clockwise")));
            }

            let m = poly.len();
            let mut face_ids = Vec::with_capacity(m);
            let mut face_signs = Vec::with_capacity(m);
            for i in 0..m {
                let (a, b) = (poly[i], poly[(i + 1) % m]);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        let length = (pb - pa).norm();
                        if length == 0.0 {
                            return Err(Error::Topology(format!("element {e} has a zero-length face")));
                        }
                        let t = (pb - pa) / length;
                        let id = faces.len();
                        faces.push(Face {
                            vertices: [a, b],
                            points: [pa, pb],
                            elements: (e, None),
                            normal: Vector::new(t.y, -t.x),
                            length,
                            midpoint: (pa + pb) * 0.5,
                        });
                        lookup.insert(key, id);
                        face_ids.push(id);
                        face_signs.push(1.0);
                    }
                    Some(&id) => {
                        let face = &mut faces[id];
                        if let Some(other) = face.elements.1 {
                            return Err(Error::Topology(format!(
                                "face ({a}, {b}) is shared by elements {}, {other} and {e}",
                                face.elements.0
                            )));
                        }
                        if face.elements.0 == e {
                            return Err(Error::Topology(format!("element {e} uses face ({a}, {b}) twice")));
                        }
                        if face.vertices != [b, a] {
                            return Err(Error::Topology(format!(
                                "face ({a}, {b}) has inconsistent orientation between elements {} and {e}",
                                face.elements.0
                            )));
                        }
                        face.elements.1 = Some(e);
                        face_ids.push(id);
                        face_signs.push(-1.0);
                    }
                }
            }

            let center = pts.iter().fold(Point::zeros(), |acc, p| acc + p) / m as f64;
            let submesh = build_submesh(&pts, &face_ids, center)
                .map_err(|_| Error::StarShape { element: e })?;
            elements.push(Element {
                vertex_ids: poly,
                face_ids,
                face_signs,
                diameter: polygon_diameter(&pts),
                area,
                center,
                submesh,
            });
        }

        let boundary_faces = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_boundary())
            .map(|(i, _)| i)
            .collect();
        let h = elements.iter().map(|e| e.diameter).fold(0.0, f64::max);
        Ok(Self { vertices, elements, faces, boundary_faces, h })
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_interior_faces(&self) -> usize {
        self.faces.len() - self.boundary_faces.len()
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    /// Largest number of simplices and faces over all elements.
    pub fn regularity_counts(&self) -> (usize, usize) {
        let simplices = self.elements.iter().map(|e| e.submesh.triangles.len()).max().unwrap_or(0);
        let faces = self.elements.iter().map(|e| e.face_ids.len()).max().unwrap_or(0);
        (simplices, faces)
    }

    /// All interior simplicial faces of the global submesh: the interior
    /// faces of every element submesh followed by the interior mesh faces.
    pub fn interior_simplicial_faces(&self) -> Vec<InteriorSimplicialFace> {
        let mut out = Vec::new();
        for (e, el) in self.elements.iter().enumerate() {
            for (i, s) in el.submesh.interior_sfaces.iter().enumerate() {
                out.push(InteriorSimplicialFace {
                    side1: (e, s.tau1),
                    side2: (e, s.tau2.expect("interior simplicial face has two sides")),
                    points: s.points,
                    normal: s.normal,
                    length: s.length,
                    local: Some(i),
                });
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            let (t1, Some(t2)) = face.elements else { continue };
            let simplex_of = |e: usize| {
                let el = &self.elements[e];
                let pos = el.face_ids.iter().position(|&x| x == f).unwrap();
                el.submesh.boundary_sfaces[pos].1[0].tau1
            };
            out.push(InteriorSimplicialFace {
                side1: (t1, simplex_of(t1)),
                side2: (t2, simplex_of(t2)),
                points: face.points,
                normal: face.normal,
                length: face.length,
                local: None,
            });
        }
        out
    }

    /// Checks the structural invariants; used by loaders and tests.
    pub fn validate(&self) -> Result<()> {
        for (e, el) in self.elements.iter().enumerate() {
            let sub: f64 = el.submesh.triangles.iter().map(|t| t.area).sum();
            if ((sub - el.area) / el.area).abs() > 1e-12 {
                return Err(Error::Topology(format!("submesh of element {e} does not cover it")));
            }
            if el.diameter > self.h {
                return Err(Error::Topology(format!("element {e} is larger than the mesh size")));
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            if let (t1, Some(t2)) = face.elements {
                let p1 = self.elements[t1].face_ids.iter().position(|&x| x == f).unwrap();
                let p2 = self.elements[t2].face_ids.iter().position(|&x| x == f).unwrap();
                let n1 = self.elements[t1].outward_normal(self, p1);
                let n2 = self.elements[t2].outward_normal(self, p2);
                if (n1 + n2).norm() > 1e-14 {
                    return Err(Error::Topology(format!("normals of face {f} are not opposite")));
                }
            }
        }
        Ok(())
    }
}
