//! Global numbering of the discrete unknowns.

use nalgebra::DVector;

use crate::basis::{dim_p2, k_star};
use crate::forms::FormMatrices;
use crate::mesh::PolyMesh;
use crate::reconstruct::LocalDofLayout;
use crate::{Point, Vector};

/// Global unknowns, in order: element velocities, velocities on interior
/// faces, element pressures and the Lagrange multiplier of the zero-mean
/// pressure constraint. Boundary face velocities are fixed to zero and have
/// no global index.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub k: usize,
    /// Per element, global index of each local velocity dof.
    local: Vec<Vec<Option<usize>>>,
    pub n_elem_velocity: usize,
    pub n_velocity: usize,
    pub n_pressure: usize,
    /// Pressure dofs per element.
    pub n_pressure_local: usize,
}

impl DofMap {
    pub fn new(mesh: &PolyMesh, k: usize) -> Self {
        let n_cell = dim_p2(k_star(k));
        let n_elem_velocity = 2 * n_cell * mesh.n_elements();
        let mut slot = vec![None; mesh.n_faces()];
        let mut next = 0;
        for (f, face) in mesh.faces.iter().enumerate() {
            if !face.is_boundary() {
                slot[f] = Some(next);
                next += 1;
            }
        }
        let nf = 2 * (k + 1);
        let local = mesh
            .elements
            .iter()
            .enumerate()
            .map(|(e, el)| {
                let l = LocalDofLayout::new(k, el.n_faces());
                let mut map = vec![None; l.total()];
                for c in 0..2 {
                    for j in 0..l.n_cell {
                        map[l.elem(c, j)] = Some(e * 2 * n_cell + c * n_cell + j);
                    }
                }
                for (i, &f) in el.face_ids.iter().enumerate() {
                    if let Some(s) = slot[f] {
                        for c in 0..2 {
                            for j in 0..=k {
                                map[l.face(i, c, j)] = Some(n_elem_velocity + s * nf + c * (k + 1) + j);
                            }
                        }
                    }
                }
                map
            })
            .collect();
        let n_pressure_local = dim_p2(k);
        Self {
            k,
            local,
            n_elem_velocity,
            n_velocity: n_elem_velocity + next * nf,
            n_pressure: n_pressure_local * mesh.n_elements(),
            n_pressure_local,
        }
    }

    /// Velocity and pressure unknowns, without the multiplier.
    pub fn n_dof(&self) -> usize {
        self.n_velocity + self.n_pressure
    }

    /// Size of the linear system including the multiplier.
    pub fn system_size(&self) -> usize {
        self.n_dof() + 1
    }

    pub fn n_elements(&self) -> usize {
        self.local.len()
    }

    pub fn velocity_map(&self, e: usize) -> &[Option<usize>] {
        &self.local[e]
    }

    /// System index of the first pressure dof of element `e`.
    pub fn pressure_offset(&self, e: usize) -> usize {
        self.n_velocity + e * self.n_pressure_local
    }

    pub fn lambda(&self) -> usize {
        self.n_dof()
    }

    /// Local velocity dofs of every element (zero on boundary faces).
    pub fn gather(&self, u: &DVector<f64>) -> Vec<DVector<f64>> {
        self.local
            .iter()
            .map(|map| DVector::from_iterator(map.len(), map.iter().map(|g| g.map_or(0.0, |g| u[g]))))
            .collect()
    }

    /// Sums local velocity vectors into a global one, dropping boundary
    /// face entries.
    pub fn scatter(&self, locals: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_velocity);
        for (map, v) in self.local.iter().zip(locals) {
            for (g, x) in map.iter().zip(v.iter()) {
                if let Some(g) = g {
                    out[*g] += x;
                }
            }
        }
        out
    }

    /// Global interpolate `I_h^k v` with the boundary values dropped.
    pub fn interpolate(&self, forms: &FormMatrices, v: &dyn Fn(&Point) -> Vector) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_velocity);
        for (map, ef) in self.local.iter().zip(&forms.elements) {
            let loc = ef.recon.bases.interpolate(v);
            for (g, x) in map.iter().zip(loc.iter()) {
                if let Some(g) = g {
                    out[*g] = *x;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_cartesian, generate_hexagonal};

    #[test]
    fn cartesian_counts() {
        for n in [2, 4, 10] {
            let mesh = generate_cartesian(n);
            let d = DofMap::new(&mesh, 1);
            assert_eq!(d.n_dof(), 17 * n * n - 8 * n);
        }
        assert_eq!(DofMap::new(&generate_cartesian(10), 1).n_dof(), 1620);
    }

    #[test]
    fn maps_are_consistent() {
        let mesh = generate_hexagonal(1);
        let d = DofMap::new(&mesh, 2);
        let mut seen = vec![0; d.n_velocity];
        for e in 0..mesh.n_elements() {
            for g in d.velocity_map(e).iter().flatten() {
                seen[*g] += 1;
            }
        }
        // Element dofs once, interior face dofs twice.
        assert!(seen[..d.n_elem_velocity].iter().all(|&c| c == 1));
        assert!(seen[d.n_elem_velocity..].iter().all(|&c| c == 2));
        let u = DVector::from_fn(d.n_velocity, |i, _| i as f64);
        let ones: Vec<_> = d.gather(&u).iter().map(|v| v.map(|_| 1.0)).collect();
        let counts = d.scatter(&ones);
        assert!(counts.iter().zip(&seen).all(|(a, &b)| *a == b as f64));
    }
}
