use crate::error::{Error, Result};
use crate::{Point, Vector};

#[derive(Debug, Clone)]
pub struct Simplex {
    pub vertices: [Point; 3],
    /// Local vertex ids: 0 is the star centre, `i + 1` is boundary vertex `i`.
    pub local_ids: [usize; 3],
    pub diameter: f64,
    pub area: f64,
    pub centroid: Point,
}

#[derive(Debug, Clone)]
pub struct SimplicialFace {
    pub points: [Point; 2],
    pub tau1: usize,
    /// `None` on the element boundary.
    pub tau2: Option<usize>,
    /// Unit normal pointing out of `tau1` (equal to `n_TF` on the boundary).
    pub normal: Vector,
    pub length: f64,
}

impl SimplicialFace {
    pub fn midpoint(&self) -> Point {
        (self.points[0] + self.points[1]) * 0.5
    }
}

#[derive(Debug, Clone)]
pub struct SubMesh {
    pub triangles: Vec<Simplex>,
    /// Face `[x_T, v_i]` is the `i`-th interior simplicial face.
    pub interior_sfaces: Vec<SimplicialFace>,
    /// Per element face (same order as `Element::face_ids`): its mesh face id
    /// and the simplicial faces partitioning it.
    pub boundary_sfaces: Vec<(usize, Vec<SimplicialFace>)>,
}

impl SubMesh {
    pub fn n_simplices(&self) -> usize {
        self.triangles.len()
    }

    /// Interior simplicial faces touching simplex `tau`, with the local
    /// index of the face.
    pub fn simplex_edges(&self, tau: usize) -> [SimplexEdge; 3] {
        let m = self.triangles.len();
        [
            SimplexEdge::Interior(tau),
            SimplexEdge::Boundary(tau),
            SimplexEdge::Interior((tau + 1) % m),
        ]
    }
}

/// The three edges of fan triangle `i = (x_T, v_i, v_{i+1})`: the interior
/// faces `[x_T, v_i]`, `[x_T, v_{i+1}]` and the boundary face `[v_i, v_{i+1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexEdge {
    Interior(usize),
    Boundary(usize),
}

fn cross(a: Vector, b: Vector) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Fan triangulation of a polygon around `center`.
///
/// `face_ids[i]` labels the polygon edge from vertex `i` to `i + 1`.
pub fn build_submesh(loop_points: &[Point], face_ids: &[usize], center: Point) -> Result<SubMesh> {
    let m = loop_points.len();
    let scale = loop_points.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
    let mut triangles = Vec::with_capacity(m);
    for i in 0..m {
        let a = loop_points[i];
        let b = loop_points[(i + 1) % m];
        let area = 0.5 * cross(a - center, b - center);
        if area <= 1e-14 * scale * scale {
            return Err(Error::StarShape { element: usize::MAX });
        }
        let vertices = [center, a, b];
        let diameter = (a - center).norm().max((b - center).norm()).max((b - a).norm());
        triangles.push(Simplex {
            vertices,
            local_ids: [0, i + 1, (i + 1) % m + 1],
            diameter,
            area,
            centroid: (center + a + b) / 3.0,
        });
    }

    let mut interior_sfaces = Vec::with_capacity(m);
    for (i, &v) in loop_points.iter().enumerate() {
        let prev = (i + m - 1) % m;
        let (tau1, tau2) = (prev.min(i), prev.max(i));
        let length = (v - center).norm();
        let t = (v - center) / length;
        let mut normal = Vector::new(t.y, -t.x);
        let mid = (v + center) * 0.5;
        if normal.dot(&(mid - triangles[tau1].centroid)) < 0.0 {
            normal = -normal;
        }
        interior_sfaces.push(SimplicialFace {
            points: [center, v],
            tau1,
            tau2: Some(tau2),
            normal,
            length,
        });
    }

    let boundary_sfaces = (0..m)
        .map(|i| {
            let a = loop_points[i];
            let b = loop_points[(i + 1) % m];
            let length = (b - a).norm();
            let t = (b - a) / length;
            let sigma = SimplicialFace {
                points: [a, b],
                tau1: i,
                tau2: None,
                normal: Vector::new(t.y, -t.x),
                length,
            };
            (face_ids[i], vec![sigma])
        })
        .collect();

    Ok(SubMesh { triangles, interior_sfaces, boundary_sfaces })
}
