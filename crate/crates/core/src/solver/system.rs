//! Global saddle-point system
//! `[[K, B^T, 0], [B, 0, m], [0, m^T, 0]]` with
//! `K = mass a_R + nu a_h (+ t_h(w, ., .))`, `B` the coupling and `m` the
//! pressure means, on a sparsity pattern fixed at construction.

use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forms::{ConvectionBlocks, FormMatrices};
use crate::mesh::PolyMesh;
use crate::solver::linear::{Factorization, SparsePattern, RESIDUAL_TOLERANCE};
use crate::solver::DofMap;

/// Refinement steps allowed with an outdated factorization before the
/// matrix is refactorized.
const LAGGED_ITERATIONS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Coefficient of the unsteady form `a_R`.
    pub mass: f64,
    pub nu: f64,
    /// Reserve the pattern of the convective coupling between neighbours.
    pub convection: bool,
    /// Eliminate element velocities by static condensation (only without
    /// convection).
    pub condense: bool,
}

/// Element-local data of the static condensation.
#[derive(Debug)]
struct CondensedElement {
    /// System indices of the element velocity dofs.
    interior_sys: Vec<usize>,
    /// Reduced indices of the remaining unknowns of the element.
    rest_red: Vec<usize>,
    inv_tt: DMatrix<f64>,
    a_tr: DMatrix<f64>,
    a_rt: DMatrix<f64>,
}

#[derive(Debug)]
struct Condensed {
    elements: Vec<CondensedElement>,
    pattern: SparsePattern,
    factor: Factorization,
}

#[derive(Debug)]
pub struct GlobalSystem<'a> {
    pub forms: &'a FormMatrices,
    pub dofmap: DofMap,
    pub params: SystemParams,
    /// Per element: system indices and the matching local indices over
    /// `[velocity; pressure]`.
    elem_sys: Vec<Vec<usize>>,
    elem_loc: Vec<Vec<usize>>,
    /// Constant local matrices over `[velocity; pressure]`.
    constant: Vec<DMatrix<f64>>,
    /// Per mesh face of the submesh: local indices into the concatenated
    /// velocity dofs of both elements.
    face_loc: Vec<Vec<usize>>,
    /// `int_T phi_0` per element.
    means: Vec<f64>,
    pattern: SparsePattern,
    /// Factorization reused when the matrix does not change.
    cached: Option<Factorization>,
    /// Latest factorization of a convective system, used to precondition
    /// the solves of later steps until refinement stops converging.
    lagged: Mutex<Option<Factorization>>,
    condensed: Option<Condensed>,
}

fn block_entries(sys: &[usize], out: &mut Vec<(usize, usize)>) {
    for &r in sys {
        for &c in sys {
            out.push((r, c));
        }
    }
}

impl<'a> GlobalSystem<'a> {
    pub fn new(mesh: &PolyMesh, forms: &'a FormMatrices, params: SystemParams) -> Result<Self> {
        if params.condense && params.convection {
            return Err(Error::Config("static condensation is only available without convection".into()));
        }
        let dofmap = DofMap::new(mesh, forms.k);
        let np = dofmap.n_pressure_local;
        let mut elem_sys = Vec::new();
        let mut elem_loc = Vec::new();
        let mut constant = Vec::new();
        let mut means = Vec::new();
        for (e, ef) in forms.elements.iter().enumerate() {
            let nv = ef.n_local();
            let mut sys = Vec::new();
            let mut loc = Vec::new();
            for (i, g) in dofmap.velocity_map(e).iter().enumerate() {
                if let Some(g) = g {
                    sys.push(*g);
                    loc.push(i);
                }
            }
            for j in 0..np {
                sys.push(dofmap.pressure_offset(e) + j);
                loc.push(nv + j);
            }
            let mut m = DMatrix::<f64>::zeros(nv + np, nv + np);
            m.view_mut((0, 0), (nv, nv))
                .copy_from(&(&ef.recon.unsteady * params.mass + &ef.viscous * params.nu));
            m.view_mut((0, nv), (nv, np)).copy_from(&ef.coupling.transpose());
            m.view_mut((nv, 0), (np, nv)).copy_from(&ef.coupling);
            let b = &ef.recon.bases;
            means.push(b.cell.eval(&b.center)[0] * mesh.elements[e].area);
            elem_sys.push(sys);
            elem_loc.push(loc);
            constant.push(m);
        }

        let mut face_sys = Vec::new();
        let mut face_loc = Vec::new();
        if params.convection {
            for &i in &forms.mesh_sigmas {
                let [(e1, _), (e2, _)] = forms.sigmas[i].sides;
                let n1 = forms.elements[e1].n_local();
                let mut sys = Vec::new();
                let mut loc = Vec::new();
                for (off, e) in [(0, e1), (n1, e2)] {
                    for (j, g) in dofmap.velocity_map(e).iter().enumerate() {
                        if let Some(g) = g {
                            sys.push(*g);
                            loc.push(off + j);
                        }
                    }
                }
                face_sys.push(sys);
                face_loc.push(loc);
            }
        }

        let mut entries = Vec::new();
        for sys in elem_sys.iter().chain(&face_sys) {
            block_entries(sys, &mut entries);
        }
        let lambda = dofmap.lambda();
        for e in 0..forms.n_elements() {
            entries.push((dofmap.pressure_offset(e), lambda));
            entries.push((lambda, dofmap.pressure_offset(e)));
        }
        let pattern = SparsePattern::new(dofmap.system_size(), entries)?;
        let mut system = Self {
            forms,
            dofmap,
            params,
            elem_sys,
            elem_loc,
            constant,
            face_loc,
            means,
            pattern,
            cached: None,
            lagged: Mutex::new(None),
            condensed: None,
        };
        if params.condense {
            system.condensed = Some(system.build_condensed()?);
        } else if !params.convection {
            system.cached = Some(system.pattern.factorize(&system.values(None))?);
        }
        Ok(system)
    }

    /// Entry values of the system matrix, in pattern order.
    pub fn values(&self, conv: Option<&ConvectionBlocks>) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.pattern.n_entries());
        for (e, (loc, m)) in self.elem_loc.iter().zip(&self.constant).enumerate() {
            let nv = self.forms.elements[e].n_local();
            let extra = conv.map(|c| &c.elements[e]);
            for &r in loc {
                for &c in loc {
                    let mut v = m[(r, c)];
                    if let Some(x) = extra {
                        if r < nv && c < nv {
                            v += x[(r, c)];
                        }
                    }
                    out.push(v);
                }
            }
        }
        for (i, loc) in self.face_loc.iter().enumerate() {
            let block = conv.map(|c| &c.faces[i]);
            for &r in loc {
                for &c in loc {
                    out.push(block.map_or(0.0, |b| b[(r, c)]));
                }
            }
        }
        for &m in &self.means {
            out.push(m);
            out.push(m);
        }
        out
    }

    /// Solves the system for `rhs` (full system vector). `conv` must be
    /// given exactly when the system was built with convection.
    pub fn solve(&self, rhs: &DVector<f64>, conv: Option<&ConvectionBlocks>) -> Result<DVector<f64>> {
        assert_eq!(conv.is_some(), self.params.convection, "convection blocks do not match the system");
        if let Some(c) = &self.condensed {
            return self.solve_condensed(c, rhs);
        }
        if let Some(f) = &self.cached {
            return f.solve(&self.pattern, rhs);
        }
        let values = self.values(conv);
        let mut lagged = self.lagged.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(x) = lagged.as_ref().and_then(|f| f.refine(&self.pattern, &values, rhs, LAGGED_ITERATIONS)) {
            return Ok(x);
        }
        let f = self.pattern.factorize(&values)?;
        let x = f.solve(&self.pattern, rhs)?;
        *lagged = Some(f);
        Ok(x)
    }

    /// Matrix-vector product with the system matrix.
    pub fn apply(&self, x: &DVector<f64>, conv: Option<&ConvectionBlocks>) -> DVector<f64> {
        self.pattern.apply(&self.values(conv), x)
    }

    fn build_condensed(&self) -> Result<Condensed> {
        let n_int = self.dofmap.n_elem_velocity;
        let mut elements = Vec::new();
        let mut entries = Vec::new();
        let mut blocks = Vec::new();
        for (e, (sys, loc)) in self.elem_sys.iter().zip(&self.elem_loc).enumerate() {
            let m = &self.constant[e];
            let (int_pos, rest_pos): (Vec<usize>, Vec<usize>) = (0..sys.len()).partition(|&i| sys[i] < n_int);
            let pick = |rows: &[usize], cols: &[usize]| {
                DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(loc[rows[i]], loc[cols[j]])])
            };
            let a_tt = pick(&int_pos, &int_pos);
            let a_tr = pick(&int_pos, &rest_pos);
            let a_rt = pick(&rest_pos, &int_pos);
            let a_rr = pick(&rest_pos, &rest_pos);
            let inv_tt = a_tt.try_inverse().ok_or(Error::LinearSolveFailure(format!(
                "element velocity block of element {e} is singular"
            )))?;
            let schur = a_rr - &a_rt * &inv_tt * &a_tr;
            let rest_red: Vec<usize> = rest_pos.iter().map(|&i| sys[i] - n_int).collect();
            block_entries(&rest_red, &mut entries);
            blocks.push(schur);
            elements.push(CondensedElement {
                interior_sys: int_pos.iter().map(|&i| sys[i]).collect(),
                rest_red,
                inv_tt,
                a_tr,
                a_rt,
            });
        }
        let lambda = self.dofmap.lambda() - n_int;
        for e in 0..self.forms.n_elements() {
            entries.push((self.dofmap.pressure_offset(e) - n_int, lambda));
            entries.push((lambda, self.dofmap.pressure_offset(e) - n_int));
        }
        let pattern = SparsePattern::new(self.dofmap.system_size() - n_int, entries)?;
        let mut values = Vec::with_capacity(pattern.n_entries());
        for s in &blocks {
            for i in 0..s.nrows() {
                for j in 0..s.ncols() {
                    values.push(s[(i, j)]);
                }
            }
        }
        for &m in &self.means {
            values.push(m);
            values.push(m);
        }
        let factor = pattern.factorize(&values)?;
        Ok(Condensed { elements, pattern, factor })
    }

    fn solve_condensed(&self, c: &Condensed, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let n_int = self.dofmap.n_elem_velocity;
        let mut reduced = rhs.rows(n_int, rhs.len() - n_int).into_owned();
        let mut local_f = Vec::with_capacity(c.elements.len());
        for el in &c.elements {
            let f = DVector::from_iterator(el.interior_sys.len(), el.interior_sys.iter().map(|&i| rhs[i]));
            let corr = &el.a_rt * (&el.inv_tt * &f);
            for (&r, v) in el.rest_red.iter().zip(corr.iter()) {
                reduced[r] -= v;
            }
            local_f.push(f);
        }
        let y = c.factor.solve(&c.pattern, &reduced)?;
        let mut x = DVector::zeros(rhs.len());
        x.rows_mut(n_int, y.len()).copy_from(&y);
        for (el, f) in c.elements.iter().zip(local_f) {
            let xr = DVector::from_iterator(el.rest_red.len(), el.rest_red.iter().map(|&r| y[r]));
            let xt = &el.inv_tt * (f - &el.a_tr * xr);
            for (&i, v) in el.interior_sys.iter().zip(xt.iter()) {
                x[i] = *v;
            }
        }
        let r = rhs - self.pattern.apply(&self.values(None), &x);
        let scale = rhs.norm();
        let rel = if scale > 0.0 { r.norm() / scale } else { r.norm() };
        if rel > RESIDUAL_TOLERANCE {
            return Err(Error::LinearSolveFailure(format!("condensed solve residual {rel:e}")));
        }
        Ok(x)
    }
}
