//! Line-oriented `poly-text` mesh format.
//!
//! ```text
//! # comment
//! NV NE NF
//! x y            (NV lines)
//! m v1 ... vm    (NE lines, counter-clockwise, 0-based)
//! ```
//!
//! Faces are derived from the element loops; `NF` must match the derived
//! count.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::PolyMesh;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    PolyText,
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<PolyMesh> {
    let text = std::fs::read_to_string(path)?;
    match format {
        MeshFormat::PolyText => parse_poly_text(&text),
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn parse_poly_text(text: &str) -> Result<PolyMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let numbers = |line: usize, s: &str| -> Result<Vec<f64>> {
        s.split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, format!("invalid number `{t}`"))))
            .collect()
    };
    let as_index = |line: usize, x: f64| -> Result<usize> {
        if x >= 0.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(parse_err(line, format!("expected a non-negative integer, found {x}")))
        }
    };

    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty mesh file"))?;
    let header = numbers(line, header)?;
    if header.len() != 3 {
        return Err(parse_err(line, "header must be `NV NE NF`"));
    }
    let nv = as_index(line, header[0])?;
    let ne = as_index(line, header[1])?;
    let nf = as_index(line, header[2])?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, s) = lines.next().ok_or_else(|| parse_err(line, "missing vertex lines"))?;
        let xy = numbers(line, s)?;
        if xy.len() != 2 {
            return Err(parse_err(line, "vertex line must hold two coordinates"));
        }
        vertices.push(Point::new(xy[0], xy[1]));
    }
    let mut polygons = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (line, s) = lines.next().ok_or_else(|| parse_err(line, "missing element lines"))?;
        let v = numbers(line, s)?;
        let m = v.first().copied().map(|x| as_index(line, x)).transpose()?.unwrap_or(0);
        if m < 3 || v.len() != m + 1 {
            return Err(parse_err(line, "element line must be `m v1 ... vm` with m >= 3"));
        }
        let ids = v[1..].iter().map(|&x| as_index(line, x)).collect::<Result<Vec<_>>>()?;
        if let Some(&bad) = ids.iter().find(|&&i| i >= nv) {
            return Err(parse_err(line, format!("vertex id {bad} out of range")));
        }
        polygons.push(ids);
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_err(line, "unexpected trailing content"));
    }

    let mesh = PolyMesh::from_polygons(vertices, polygons)?;
    if mesh.n_faces() != nf {
        return Err(Error::Topology(format!("header declares {nf} faces, elements define {}", mesh.n_faces())));
    }
    mesh.validate()?;
    Ok(mesh)
}

pub fn write_poly_text(mesh: &PolyMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", mesh.vertices.len(), mesh.n_elements(), mesh.n_faces());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{:.17e} {:.17e}", v.x, v.y);
    }
    for el in &mesh.elements {
        let _ = write!(out, "{}", el.vertex_ids.len());
        for v in &el.vertex_ids {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_cartesian;

    const FOUR_SQUARES: &str = "\
# 2x2 squares
9 4 12
0 0
0.5 0
1 0
0 0.5
0.5 0.5
1 0.5
0 1
0.5 1
1 1
4 0 1 4 3
4 1 2 5 4
4 3 4 7 6
4 4 5 8 7
";

    #[test]
    fn loads_four_elements() {
        let m = parse_poly_text(FOUR_SQUARES).unwrap();
        assert_eq!(m.n_elements(), 4);
        assert_eq!(m.boundary_faces.len(), 8);
    }

    #[test]
    fn face_in_three_elements_is_rejected() {
        // Three triangles hanging off the edge (0, 1).
        let text = "5 3 0\n0 0\n1 0\n0.5 1\n0.5 -1\n0.5 2\n3 0 1 2\n3 1 0 3\n3 0 1 4\n";
        assert!(matches!(parse_poly_text(text), Err(Error::Topology(_))));
    }

    #[test]
    fn nonconvex_l_with_outside_mean_fails_star_test() {
        // Thin L: the vertex mean (0.2875, 0.2875) falls outside the region.
        let text = "6 1 6\n0 0\n1 0\n1 0.05\n0.05 0.05\n0.05 1\n0 1\n6 0 1 2 3 4 5\n";
        assert!(matches!(parse_poly_text(text), Err(Error::StarShape { element: 0 })));
    }

    #[test]
    fn malformed_lines_are_parse_errors() {
        assert!(matches!(parse_poly_text("3 1 3\n0 0\n1 x\n0 1\n3 0 1 2\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_poly_text("3 1 3\n0 0\n1 0\n0 1\n4 0 1 2\n"), Err(Error::Parse { line: 5, .. })));
        assert!(matches!(parse_poly_text(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn clockwise_loop_is_rejected() {
        assert!(matches!(parse_poly_text("3 1 3\n0 0\n0 1\n1 0\n3 0 1 2\n"), Err(Error::Topology(_))));
    }

    #[test]
    fn write_then_parse_preserves_mesh() {
        let m = generate_cartesian(3);
        let back = parse_poly_text(&write_poly_text(&m)).unwrap();
        assert_eq!(back.n_faces(), m.n_faces());
        assert_eq!(back.vertices, m.vertices);
    }
}
