//! Randomized checks of the algebraic properties of the local and global
//! operators. Every check reports the worst observed defect against a fixed
//! tolerance.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{dim_p2, element_basis, element_quadrature, monomial_exponents, KoszulSpaces, Quadrature};
use crate::error::{Error, Result};
use crate::forms::{
    body_force, convection::penalty_matrix, convection_assemble, penalty_energy, trilinear, upwind_dissipation,
    ConvectionContext, FormMatrices,
};
use crate::mesh::{generate_cartesian, generate_hexagonal, PolyMesh};
use crate::potential::{recovery, PotentialOperator};
use crate::reconstruct::ElementReconstruction;
use crate::solver::DofMap;
use crate::{Point, Vector};

/// Outcome of one property over a batch of random instances.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub instances: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropertyCheck {
    fn new(name: &str, tolerance: f64, defects: &[f64]) -> Self {
        let worst = defects.iter().copied().fold(0.0, f64::max);
        let finite = defects.iter().all(|d| d.is_finite());
        Self {
            name: name.to_string(),
            instances: defects.len(),
            worst,
            tolerance,
            passed: finite && !defects.is_empty() && worst <= tolerance,
        }
    }
}

impl std::fmt::Display for PropertyCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<44} n={:<4} worst={:<10.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.worst,
            self.tolerance
        )
    }
}

/// Vector polynomial with random coefficients in scaled monomials around
/// `center`.
#[derive(Debug, Clone)]
pub struct RandomField {
    center: Point,
    scale: f64,
    exps: Vec<(usize, usize)>,
    cx: Vec<f64>,
    cy: Vec<f64>,
}

impl RandomField {
    pub fn new(rng: &mut ChaCha8Rng, degree: usize, center: Point, scale: f64) -> Self {
        let exps = monomial_exponents(degree);
        let mut draw = || exps.iter().map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        let cx = draw();
        let cy = draw();
        Self { center, scale, exps, cx, cy }
    }

    fn terms(&self, p: &Point) -> impl Iterator<Item = (usize, f64, f64, f64)> + '_ {
        let xi = (p.x - self.center.x) / self.scale;
        let eta = (p.y - self.center.y) / self.scale;
        self.exps.iter().enumerate().map(move |(i, &(a, b))| {
            let m = xi.powi(a as i32) * eta.powi(b as i32);
            let mx = if a > 0 { a as f64 * xi.powi(a as i32 - 1) * eta.powi(b as i32) / self.scale } else { 0.0 };
            let my = if b > 0 { b as f64 * xi.powi(a as i32) * eta.powi(b as i32 - 1) / self.scale } else { 0.0 };
            (i, m, mx, my)
        })
    }

    pub fn eval(&self, p: &Point) -> Vector {
        self.terms(p).fold(Vector::zeros(), |acc, (i, m, _, _)| acc + Vector::new(self.cx[i], self.cy[i]) * m)
    }

    pub fn divergence(&self, p: &Point) -> f64 {
        self.terms(p).map(|(i, _, mx, my)| self.cx[i] * mx + self.cy[i] * my).sum()
    }

    /// Gradient of the scalar polynomial with the `x` coefficients.
    pub fn scalar_gradient(&self, p: &Point) -> Vector {
        self.terms(p).fold(Vector::zeros(), |acc, (i, _, mx, my)| acc + Vector::new(mx, my) * self.cx[i])
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Largest generalized eigenvalue of `m x = lambda a x` with `a` SPD.
fn max_generalized_eigenvalue(m: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<f64> {
    let chol = a.clone().cholesky().ok_or(Error::SingularGram { element: usize::MAX })?;
    let n = a.nrows();
    let linv = chol.l().solve_lower_triangular(&DMatrix::identity(n, n)).ok_or(Error::SingularGram { element: usize::MAX })?;
    let s = &linv * m * linv.transpose();
    let s = (&s + s.transpose()) * 0.5;
    Ok(SymmetricEigen::new(s).eigenvalues.max())
}

fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.max()
}

/// Orthonormal basis of the discretely divergence-free velocities: the
/// kernel of the global coupling, boundary face values being zero.
pub fn divergence_free_basis(forms: &FormMatrices, dofmap: &DofMap) -> DMatrix<f64> {
    let mut b = DMatrix::<f64>::zeros(dofmap.n_pressure, dofmap.n_velocity);
    for (e, ef) in forms.elements.iter().enumerate() {
        let off = e * dofmap.n_pressure_local;
        for (j, g) in dofmap.velocity_map(e).iter().enumerate() {
            if let Some(g) = g {
                for i in 0..dofmap.n_pressure_local {
                    b[(off + i, *g)] += ef.coupling[(i, j)];
                }
            }
        }
    }
    let eig = SymmetricEigen::new(b.transpose() * &b);
    let top = eig.eigenvalues.max().max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] < 1e-10 * top).collect();
    DMatrix::from_fn(dofmap.n_velocity, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
}

/// Random unit-norm combination of the columns of `basis`.
pub fn random_in_span(rng: &mut ChaCha8Rng, basis: &DMatrix<f64>) -> DVector<f64> {
    let v = basis * random_vector(rng, basis.ncols());
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}

/// `l_h(grad psi, v) = 0` for discretely divergence-free `v` and random
/// polynomial potentials `psi` of degree `k + 2`.
pub fn pressure_robustness_check(mesh: &PolyMesh, k: usize, samples: usize, seed: u64) -> Result<PropertyCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forms = FormMatrices::build(mesh, k, 0)?;
    let dofmap = DofMap::new(mesh, k);
    let kernel = divergence_free_basis(&forms, &dofmap);
    let mut defects = Vec::with_capacity(samples);
    for _ in 0..samples {
        let v = random_in_span(&mut rng, &kernel);
        let psi = RandomField::new(&mut rng, k + 2, Point::new(0.5, 0.5), 0.5);
        defects.push(body_force(&forms, &|p| psi.scalar_gradient(p), &dofmap.gather(&v)).abs());
    }
    Ok(PropertyCheck::new("load of a gradient on div-free fields", 1e-11, &defects))
}

/// Convective dissipativity for random divergence-free transports `w` and
/// arbitrary `v`: the form is nonnegative and equals the upwind dissipation
/// plus the penalty energy.
pub fn dissipativity_checks(mesh: &PolyMesh, k: usize, samples: usize, seed: u64) -> Result<[PropertyCheck; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forms = FormMatrices::build(mesh, k, 0)?;
    let dofmap = DofMap::new(mesh, k);
    let kernel = divergence_free_basis(&forms, &dofmap);
    let mut negativity = Vec::with_capacity(samples);
    let mut mismatch = Vec::with_capacity(samples);
    for _ in 0..samples {
        let w = random_in_span(&mut rng, &kernel) * rng.random_range(0.1..10.0);
        let v = dofmap.gather(&random_vector(&mut rng, dofmap.n_velocity));
        let ctx = ConvectionContext::new(&forms, dofmap.gather(&w))?;
        let blocks = convection_assemble(&forms, &ctx);
        let t = trilinear(&forms, &blocks, &v, &v);
        let explicit = upwind_dissipation(&forms, &ctx, &v) + penalty_energy(&forms, &ctx, &v);
        negativity.push((-t).max(0.0));
        mismatch.push((t - explicit).abs() / explicit.abs().max(f64::MIN_POSITIVE));
    }
    Ok([
        PropertyCheck::new("convection is nonnegative (negative part)", 1e-10, &negativity),
        PropertyCheck::new("convection equals dissipation sum (rel)", 1e-9, &mismatch),
    ])
}

/// The penalty vanishes identically for `k = 0`, and up to rounding for
/// interpolates of polynomials of degree `k`, whose reconstruction is the
/// polynomial itself. The second defect is the penalty energy relative to
/// that of a random field of the same size.
pub fn penalty_zero_checks(samples: usize, seed: u64) -> Result<[PropertyCheck; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let meshes = [generate_cartesian(4), generate_hexagonal(1)];
    let mut zero = Vec::new();
    let mut poly = Vec::new();
    for mesh in &meshes {
        let dofmap = DofMap::new(mesh, 0);
        let forms = FormMatrices::build(mesh, 0, 0)?;
        for _ in 0..samples.div_ceil(meshes.len()) {
            let w = dofmap.gather(&random_vector(&mut rng, dofmap.n_velocity));
            let v = dofmap.gather(&random_vector(&mut rng, dofmap.n_velocity));
            let ctx = ConvectionContext::new_unchecked(&forms, w);
            let matrices = (0..forms.n_elements()).map(|e| penalty_matrix(&forms, &ctx, e).amax()).fold(0.0, f64::max);
            zero.push(penalty_energy(&forms, &ctx, &v).abs().max(matrices));
        }
        for k in [1, 2] {
            let forms = FormMatrices::build(mesh, k, 0)?;
            for _ in 0..samples.div_ceil(2 * meshes.len()) {
                let w: Vec<_> = forms.elements.iter().map(|ef| random_vector(&mut rng, ef.n_local())).collect();
                let ctx = ConvectionContext::new_unchecked(&forms, w);
                let q = RandomField::new(&mut rng, k, Point::new(0.5, 0.5), 0.5);
                let v: Vec<_> = forms.elements.iter().map(|ef| ef.recon.bases.interpolate(&|p| q.eval(p))).collect();
                let scale = v.iter().map(|x| x.norm()).sum::<f64>();
                let noise: Vec<_> = v.iter().map(|x| random_vector(&mut rng, x.len()) * (scale / v.len() as f64)).collect();
                let reference = penalty_energy(&forms, &ctx, &noise);
                poly.push(penalty_energy(&forms, &ctx, &v) / reference);
            }
        }
    }
    Ok([
        PropertyCheck::new("penalty is zero for k = 0", 0.0, &zero),
        PropertyCheck::new("penalty vanishes on polynomials (rel)", 1e-20, &poly),
    ])
}

/// Local operators of every element of `mesh` for each degree in `ks`.
fn element_pool(meshes: &[&PolyMesh], ks: &[usize]) -> Result<Vec<(usize, ElementReconstruction)>> {
    let mut out = Vec::new();
    for mesh in meshes {
        for &k in ks {
            for e in 0..mesh.n_elements() {
                out.push((k, ElementReconstruction::build(mesh, e, k, 0)?));
            }
        }
    }
    Ok(out)
}

fn l2_projection(basis: &crate::basis::Basis2d, quad: &Quadrature, n: usize, f: impl Fn(&Point) -> f64) -> DVector<f64> {
    let mut out = DVector::zeros(n);
    for (p, w) in quad.points.iter().zip(&quad.weights) {
        out.axpy(w * f(p), &basis.eval(p).rows(0, n).into_owned(), 1.0);
    }
    out
}

fn reconstruction_checks(pool: &[(usize, ElementReconstruction)], rng: &mut ChaCha8Rng) -> Vec<PropertyCheck> {
    let mut commuting = Vec::new();
    let mut consistency = Vec::new();
    let mut divergence = Vec::new();
    let mut moments = Vec::new();
    for (k, op) in pool {
        let k = *k;
        let b = &op.bases;
        let l = &b.layout;
        let nk = dim_p2(k);
        let ns = b.n_simplex();

        let v = RandomField::new(rng, k + 2, b.center, b.diameter);
        let d_interp = &op.divergence * b.interpolate(&|p| v.eval(p));
        let mut proj = DVector::zeros(nk);
        for (p, w) in b.cell_points() {
            proj.axpy(w * v.divergence(p), &b.cell.eval(p).rows(0, nk).into_owned(), 1.0);
        }
        commuting.push((d_interp - &proj).norm() / (1.0 + proj.norm()));

        let q = RandomField::new(rng, k, b.center, b.diameter);
        let r = &op.reconstruction * b.interpolate(&|p| q.eval(p));
        let mut err: f64 = 0.0;
        let mut size: f64 = 0.0;
        for (t, (basis, quad)) in b.simplices.iter().zip(&b.simplex_quads).enumerate() {
            let px = l2_projection(basis, quad, ns, |p| q.eval(p).x);
            let py = l2_projection(basis, quad, ns, |p| q.eval(p).y);
            err += (r.rows(t * 2 * ns, ns) - &px).norm_squared() + (r.rows(t * 2 * ns + ns, ns) - &py).norm_squared();
            size += px.norm_squared() + py.norm_squared();
        }
        consistency.push((err / size.max(f64::MIN_POSITIVE)).sqrt());

        let dofs = random_vector(rng, l.total());
        let r = &op.reconstruction * &dofs;
        let dv = &op.divergence * &dofs;
        let (mut err, mut size) = (0.0, 0.0);
        for (t, (basis, quad)) in b.simplices.iter().zip(&b.simplex_quads).enumerate() {
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let (gx, gy) = basis.eval_grad(p);
                let div = gx.dot(&r.rows(t * 2 * ns, ns)) + gy.dot(&r.rows(t * 2 * ns + ns, ns));
                let target = b.cell.eval(p).rows(0, nk).dot(&dv);
                err += w * (div - target).powi(2);
                size += w * target * target;
            }
        }
        divergence.push((err / size.max(f64::MIN_POSITIVE)).sqrt());

        if k >= 1 {
            let nm = dim_p2(k - 1);
            let mut m = DVector::zeros(2 * nm);
            for (t, (basis, quad)) in b.simplices.iter().zip(&b.simplex_quads).enumerate() {
                for (p, w) in quad.points.iter().zip(&quad.weights) {
                    let psi = basis.eval(p);
                    let rv = Vector::new(psi.dot(&r.rows(t * 2 * ns, ns)), psi.dot(&r.rows(t * 2 * ns + ns, ns)));
                    let phi = b.cell.eval(p);
                    for j in 0..nm {
                        m[j] += w * rv.x * phi[j];
                        m[nm + j] += w * rv.y * phi[j];
                    }
                }
            }
            let vt = DVector::from_fn(2 * nm, |i, _| dofs[if i < nm { l.elem(0, i) } else { l.elem(1, i - nm) }]);
            moments.push((m - &vt).norm() / (1.0 + vt.norm()));
        }
    }
    vec![
        PropertyCheck::new("divergence commutes with interpolation", 1e-10, &commuting),
        PropertyCheck::new("reconstruction reproduces P^k", 1e-10, &consistency),
        PropertyCheck::new("divergence of reconstruction", 1e-9, &divergence),
        PropertyCheck::new("reconstruction keeps P^{k-1} moments", 1e-10, &moments),
    ]
}

/// Per (family, degree): largest constant over the elements of each
/// refinement level. The defect is the relative spread between levels.
struct Stability {
    levels: Vec<Vec<(usize, f64)>>,
}

impl Stability {
    fn defects(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for pair in self.levels.windows(2) {
            let max_of = |level: &[(usize, f64)], key: usize| {
                level.iter().filter(|(k, _)| *k == key).map(|(_, c)| *c).fold(0.0, f64::max)
            };
            // One instance per element and degree on the finer level.
            for &(key, _) in &pair[1] {
                let (c0, c1) = (max_of(&pair[0], key), max_of(&pair[1], key));
                out.push((c1 / c0 - 1.0).abs().max((c0 / c1 - 1.0).abs()));
            }
        }
        out
    }
}

/// Mesh families used for the scaling checks, coarse level first.
fn families() -> Vec<[PolyMesh; 2]> {
    vec![[generate_cartesian(2), generate_cartesian(4)], [generate_hexagonal(1), generate_hexagonal(2)]]
}

const STABILITY_TOLERANCE: f64 = 0.25;

fn norm_bound_checks(fams: &[[PolyMesh; 2]]) -> Result<Vec<PropertyCheck>> {
    let mut l2 = Vec::new();
    let mut h1 = Vec::new();
    for fam in fams {
        let mut s_l2 = Stability { levels: vec![] };
        let mut s_h1 = Stability { levels: vec![] };
        for mesh in fam {
            let mut c_l2 = Vec::new();
            let mut c_h1 = Vec::new();
            for k in 0..=2 {
                for e in 0..mesh.n_elements() {
                    let op = ElementReconstruction::build(mesh, e, k, 0)?;
                    let forms_norm = crate::forms::norm_1h_matrix(&op.bases);
                    let l = op.layout();
                    let n = l.total();
                    let mut mass = DMatrix::<f64>::zeros(n, n);
                    for i in 0..l.n_elem_dofs() {
                        mass[(i, i)] = 1.0;
                    }
                    let h = op.bases.diameter;
                    c_l2.push((k, max_generalized_eigenvalue(&mass, &op.unsteady)?.sqrt()));
                    c_h1.push((k, (h * h * max_generalized_eigenvalue(&forms_norm, &op.unsteady)?).sqrt()));
                }
            }
            s_l2.levels.push(c_l2);
            s_h1.levels.push(c_h1);
        }
        l2.extend(s_l2.defects());
        h1.extend(s_h1.defects());
    }
    Ok(vec![
        PropertyCheck::new("L2 bound by reconstruction norm (scaling)", STABILITY_TOLERANCE, &l2),
        PropertyCheck::new("H1 bound by reconstruction norm (scaling)", STABILITY_TOLERANCE, &h1),
    ])
}

fn inequality_checks(fams: &[[PolyMesh; 2]]) -> Result<Vec<PropertyCheck>> {
    let mut inverse = Vec::new();
    let mut trace = Vec::new();
    let mut embedding = Vec::new();
    for fam in fams {
        let mut s = [Stability { levels: vec![] }, Stability { levels: vec![] }, Stability { levels: vec![] }];
        for mesh in fam {
            let mut c = [Vec::new(), Vec::new(), Vec::new()];
            for degree in 0..=3 {
                for (e, el) in mesh.elements.iter().enumerate() {
                    let basis = element_basis(el, e, degree)?;
                    let n = basis.dim();
                    let quad = element_quadrature(el, 2 * degree + 4)?;
                    let mut stiff = DMatrix::<f64>::zeros(n, n);
                    let mut sup: f64 = 0.0;
                    for (p, w) in quad.points.iter().zip(&quad.weights) {
                        let (gx, gy) = basis.eval_grad(p);
                        stiff += (&gx * gx.transpose() + &gy * gy.transpose()) * *w;
                        sup = sup.max(basis.eval(p).norm());
                    }
                    let mut bmass = DMatrix::<f64>::zeros(n, n);
                    for &f in &el.face_ids {
                        let face = &mesh.faces[f];
                        let fq = Quadrature::segment(2 * degree, face.points[0], face.points[1])?;
                        for (p, w) in fq.points.iter().zip(&fq.weights) {
                            let v = basis.eval(p);
                            bmass += &v * v.transpose() * *w;
                        }
                        sup = sup.max(basis.eval(&face.points[0]).norm());
                    }
                    let h = el.diameter;
                    c[0].push((degree, h * max_eigenvalue(&stiff).max(0.0).sqrt()));
                    c[1].push((degree, (h * max_eigenvalue(&bmass)).sqrt()));
                    c[2].push((degree, el.area.sqrt() * sup));
                }
            }
            for (si, ci) in s.iter_mut().zip(c) {
                si.levels.push(ci);
            }
        }
        inverse.extend(s[0].defects().into_iter().filter(|d| d.is_finite()));
        trace.extend(s[1].defects());
        embedding.extend(s[2].defects());
    }
    Ok(vec![
        PropertyCheck::new("inverse inequality (scaling)", STABILITY_TOLERANCE, &inverse),
        PropertyCheck::new("discrete trace inequality (scaling)", STABILITY_TOLERANCE, &trace),
        PropertyCheck::new("Lebesgue embedding (scaling)", STABILITY_TOLERANCE, &embedding),
    ])
}

fn potential_checks(pool: &[(usize, ElementReconstruction)], rng: &mut ChaCha8Rng) -> Result<Vec<PropertyCheck>> {
    let mut gradient = Vec::new();
    let mut complement_zero = Vec::new();
    let mut remainder = Vec::new();
    let mut polynomial = Vec::new();
    let mut recover = Vec::new();
    let mut gamma = Vec::new();
    for (k, op) in pool {
        let l = *k;
        let b = &op.bases;
        let pot = PotentialOperator::build(&b.simplices, &b.simplex_quads, l, b.center)?;
        let nl = dim_p2(l);
        let nl1 = dim_p2(l + 1);

        // Broken gradient of a random broken P^{l+1} function.
        let mut q = DVector::zeros(pot.input_dim());
        for (t, (basis, quad)) in b.simplices.iter().zip(&b.simplex_quads).enumerate() {
            let c = random_vector(rng, nl1);
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let (gx, gy) = basis.eval_grad(p);
                let (px, py) = (gx.rows(0, nl1).dot(&c), gy.rows(0, nl1).dot(&c));
                let psi = basis.eval(p);
                for i in 0..nl {
                    q[t * 2 * nl + i] += w * px * psi[i];
                    q[t * 2 * nl + nl + i] += w * py * psi[i];
                }
            }
        }
        gradient.push((pot.apply_gradient(&q) - &q).norm() / q.norm());

        let random_q = random_vector(rng, pot.input_dim());
        let mut c = DVector::zeros(pot.input_dim());
        for (t, kb) in pot.koszul.iter().enumerate() {
            let xi = random_vector(rng, kb.gc.ncols());
            c.rows_mut(t * 2 * nl, 2 * nl).copy_from(&(&kb.gc * xi));
        }
        if l >= 1 {
            let img = pot.apply(&c);
            let size: f64 = img.coefs.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt();
            complement_zero.push(size / (b.diameter * c.norm()));
        }

        let r = &random_q - pot.apply_gradient(&random_q);
        let mut res: f64 = 0.0;
        for (t, kb) in pot.koszul.iter().enumerate() {
            let rt = r.rows(t * 2 * nl, 2 * nl);
            res += (rt - &kb.proj_gc * rt).norm_squared();
        }
        remainder.push(res.sqrt() / random_q.norm());

        // Potential of a polynomial on the whole element.
        let field = RandomField::new(rng, l, b.center, b.diameter);
        let mut qp = DVector::zeros(pot.input_dim());
        for (t, (basis, quad)) in b.simplices.iter().zip(&b.simplex_quads).enumerate() {
            qp.rows_mut(t * 2 * nl, nl).copy_from(&l2_projection(basis, quad, nl, |p| field.eval(p).x));
            qp.rows_mut(t * 2 * nl + nl, nl).copy_from(&l2_projection(basis, quad, nl, |p| field.eval(p).y));
        }
        let img = pot.apply(&qp);
        let ncell = dim_p2(l + 1);
        let mut proj = DVector::zeros(ncell);
        for (t, quad) in b.simplex_quads.iter().enumerate() {
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                proj.axpy(w * img.eval(&b.simplices, t, p), &b.cell.eval(p).rows(0, ncell).into_owned(), 1.0);
            }
        }
        let (mut err, mut size) = (0.0, 0.0);
        for (t, quad) in b.simplex_quads.iter().enumerate() {
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let v = img.eval(&b.simplices, t, p);
                err += w * (v - b.cell.eval(p).rows(0, ncell).dot(&proj)).powi(2);
                size += w * v * v;
            }
        }
        polynomial.push((err / size.max(f64::MIN_POSITIVE)).sqrt());

        for (t, (kb, gm)) in pot.koszul.iter().zip(&pot.gammas).enumerate() {
            let qt = random_q.rows(t * 2 * nl, 2 * nl).into_owned();
            let back = recovery(kb, gm, &(&kb.proj_g * &qt), &(&kb.proj_gc * &qt));
            recover.push((back - &qt).norm() / qt.norm());
            let bg = &kb.proj_g * &qt;
            let cg = &kb.proj_gc * &qt;
            let eb = &gm.gamma_g * (&bg - &kb.proj_g * (&kb.proj_gc * &bg)) - &bg;
            let ec = &gm.gamma_gc * (&cg - &kb.proj_gc * (&kb.proj_g * &cg)) - &cg;
            gamma.push(eb.norm() / bg.norm().max(1e-300) + if cg.norm() > 0.0 { ec.norm() / cg.norm() } else { 0.0 });
        }
    }
    Ok(vec![
        PropertyCheck::new("potential inverts the gradient on G", 1e-10, &gradient),
        PropertyCheck::new("potential vanishes on the complement", 1e-10, &complement_zero),
        PropertyCheck::new("q - grad potential lies in complement", 1e-10, &remainder),
        PropertyCheck::new("potential of a polynomial is polynomial", 1e-10, &polynomial),
        PropertyCheck::new("recovery from Koszul projections", 1e-10, &recover),
        PropertyCheck::new("Gamma operators fix their spaces", 1e-10, &gamma),
    ])
}

fn koszul_checks(meshes: &[&PolyMesh]) -> Result<PropertyCheck> {
    let mut defects = Vec::new();
    for mesh in meshes {
        for (e, el) in mesh.elements.iter().enumerate() {
            for l in 0..=3 {
                let basis = element_basis(el, e, l + 1)?;
                let quad = element_quadrature(el, 2 * l + 2)?;
                let ks = KoszulSpaces::on_element(&basis, &quad, l, el.center);
                let gc = if l == 0 { 0 } else { dim_p2(l - 1) };
                let ok = ks.dim_g() == dim_p2(l + 1) - 1
                    && ks.dim_gc() == gc
                    && ks.dim_g() + ks.dim_gc() == 2 * dim_p2(l)
                    && ks.decomposition_rank() == ks.dim();
                let bases = el
                    .submesh
                    .triangles
                    .iter()
                    .map(|t| crate::basis::simplex_basis(t, e, l + 1))
                    .collect::<Result<Vec<_>>>()?;
                let quads = el
                    .submesh
                    .triangles
                    .iter()
                    .map(|t| Quadrature::triangle(2 * l + 2, t.vertices))
                    .collect::<Result<Vec<_>>>()?;
                let sub = KoszulSpaces::on_submesh(&bases, &quads, l, el.center);
                let nt = el.submesh.n_simplices();
                let ok_sub = sub.dim_g() == nt * (dim_p2(l + 1) - 1)
                    && sub.dim_gc() == nt * gc
                    && sub.decomposition_rank() == 2 * nt * dim_p2(l);
                defects.push(if ok && ok_sub { 0.0 } else { 1.0 });
            }
        }
    }
    Ok(PropertyCheck::new("Koszul decomposition dimensions", 0.0, &defects))
}

/// Runs every local property check on elements of Cartesian and hexagonal
/// meshes with `k` in `{0, 1, 2}`.
pub fn property_suite(seed: u64) -> Result<Vec<PropertyCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cart = generate_cartesian(2);
    let hex = generate_hexagonal(1);
    let pool = element_pool(&[&cart, &generate_cartesian(3), &hex], &[0, 1, 2])?;
    let fams = families();
    let mut out = reconstruction_checks(&pool, &mut rng);
    out.extend(norm_bound_checks(&fams)?);
    out.extend(potential_checks(&pool, &mut rng)?);
    out.push(koszul_checks(&[&cart, &hex])?);
    out.extend(inequality_checks(&fams)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_field_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = RandomField::new(&mut rng, 3, Point::new(0.2, 0.1), 0.7);
        let p = Point::new(0.4, 0.3);
        let h = 1e-6;
        let dx = (f.eval(&(p + Vector::new(h, 0.0))) - f.eval(&(p - Vector::new(h, 0.0)))) / (2.0 * h);
        let dy = (f.eval(&(p + Vector::new(0.0, h))) - f.eval(&(p - Vector::new(0.0, h)))) / (2.0 * h);
        assert!((f.divergence(&p) - dx.x - dy.y).abs() < 1e-7);
        assert!((f.scalar_gradient(&p) - Vector::new(dx.x, dy.x)).norm() < 1e-7);
    }

    #[test]
    fn property_check_verdicts() {
        assert!(PropertyCheck::new("a", 1e-3, &[1e-4, 0.0]).passed);
        assert!(!PropertyCheck::new("b", 1e-3, &[1e-2]).passed);
        assert!(!PropertyCheck::new("c", 1e-3, &[f64::NAN]).passed);
        assert!(!PropertyCheck::new("d", 1e-3, &[]).passed);
    }
}
