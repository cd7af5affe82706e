use std::collections::HashMap;

use crate::mesh::PolyMesh;
use crate::Point;

/// `n x n` uniform squares on the unit square.
pub fn generate_cartesian(n: usize) -> PolyMesh {
    assert!(n >= 1, "cartesian mesh needs at least one cell per direction");
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    let mut polygons = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            polygons.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    PolyMesh::from_polygons(vertices, polygons).expect("cartesian grid is a valid mesh")
}

/// Hexagon-dominant tiling of the unit square, refined by doubling the
/// number of cells in each direction: level `L` has `2^(L+1)` cells per row
/// and `2^(L+1)` rows.
pub fn generate_hexagonal(level: usize) -> PolyMesh {
    assert!(level >= 1, "hexagonal levels start at 1");
    let n = 1usize << (level + 1);
    hexagonal_grid(n, n)
}

/// Pointy-top hexagons in `rows` staggered rows of `cols` cells, clipped to
/// the unit square. The first and last rows are cut through the hexagon
/// centres, and the left (right) boundary cuts even (odd) rows through their
/// centres, so no slivers appear.
pub fn hexagonal_grid(cols: usize, rows: usize) -> PolyMesh {
    assert!(cols >= 1 && rows >= 2, "hexagonal grid needs at least one column and two rows");
    let w = 1.0 / (cols as f64 - 0.5);
    let dy = 1.0 / (rows as f64 - 1.0);
    let (a, b) = (dy / 3.0, 2.0 * dy / 3.0);

    let mut vertices: Vec<Point> = Vec::new();
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut polygons = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        let cy = j as f64 * dy;
        for c in 0..cols {
            let cx = if j % 2 == 0 { c as f64 * w } else { (c as f64 + 0.5) * w };
            let hex = [
                Point::new(cx, cy - b),
                Point::new(cx + 0.5 * w, cy - a),
                Point::new(cx + 0.5 * w, cy + a),
                Point::new(cx, cy + b),
                Point::new(cx - 0.5 * w, cy + a),
                Point::new(cx - 0.5 * w, cy - a),
            ];
            let clipped = clip_to_unit_square(&hex);
            let mut poly: Vec<usize> = Vec::with_capacity(clipped.len());
            for p in clipped {
                let p = Point::new(snap(p.x), snap(p.y));
                let key = ((p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64);
                let v = *index.entry(key).or_insert_with(|| {
                    vertices.push(p);
                    vertices.len() - 1
                });
                if poly.last() != Some(&v) && poly.first() != Some(&v) {
                    poly.push(v);
                }
            }
            polygons.push(poly);
        }
    }
    PolyMesh::from_polygons(vertices, polygons).expect("hexagonal grid is a valid mesh")
}

fn snap(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else if (x - 1.0).abs() < 1e-12 {
        1.0
    } else {
        x
    }
}

/// Sutherland-Hodgman clipping of a convex polygon against `[0, 1]^2`.
fn clip_to_unit_square(poly: &[Point]) -> Vec<Point> {
    const EPS: f64 = 1e-12;
    let planes: [(usize, f64, f64); 4] = [(0, 0.0, 1.0), (0, 1.0, -1.0), (1, 0.0, 1.0), (1, 1.0, -1.0)];
    let mut out = poly.to_vec();
    for (axis, offset, sign) in planes {
        let dist = |p: &Point| sign * (p[axis] - offset);
        let input = std::mem::take(&mut out);
        for i in 0..input.len() {
            let cur = input[i];
            let next = input[(i + 1) % input.len()];
            let (dc, dn) = (dist(&cur), dist(&next));
            if dc >= -EPS {
                out.push(cur);
            }
            if (dc > EPS && dn < -EPS) || (dc < -EPS && dn > EPS) {
                let t = dc / (dc - dn);
                out.push(cur + (next - cur) * t);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_counts() {
        let m = generate_cartesian(2);
        assert_eq!((m.n_elements(), m.n_faces(), m.vertices.len()), (4, 12, 9));
        assert!((m.h - 2f64.sqrt() / 2.0).abs() < 1e-15);
        let m = generate_cartesian(1);
        assert_eq!((m.n_elements(), m.n_faces()), (1, 4));
        assert_eq!(m.elements[0].submesh.triangles.len(), 4);
    }

    #[test]
    fn cartesian_area_partition() {
        let m = generate_cartesian(4);
        assert!((m.total_area() - 1.0).abs() < 1e-12);
        m.validate().unwrap();
    }

    #[test]
    fn hexagonal_interior_cells_are_hexagons() {
        let m = generate_hexagonal(1);
        assert_eq!(m.n_elements(), 16);
        for el in &m.elements {
            let interior = el.face_ids.iter().all(|&f| !m.faces[f].is_boundary());
            if interior {
                assert_eq!(el.n_faces(), 6);
            }
        }
        assert!((m.total_area() - 1.0).abs() < 1e-12);
        m.validate().unwrap();
    }

    #[test]
    fn hexagonal_refinement_ratio() {
        for level in 1..4 {
            let r = generate_hexagonal(level + 1).h / generate_hexagonal(level).h;
            assert!((0.4..=0.6).contains(&r), "level {level}: ratio {r}");
        }
    }

    #[test]
    fn regularity_constant_bounded() {
        for level in 1..4 {
            let (s, f) = generate_hexagonal(level).regularity_counts();
            assert!(s <= 12 && f <= 12);
        }
        for n in [2, 8, 32] {
            let (s, f) = generate_cartesian(n).regularity_counts();
            assert!(s <= 12 && f <= 12);
        }
    }
}
