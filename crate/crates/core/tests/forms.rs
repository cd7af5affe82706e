use nalgebra::DVector;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hho_core::forms::{
    body_force, convection_assemble, penalty_energy, trilinear, upwind_dissipation, ConvectionContext, FormMatrices,
};
use hho_core::harness::{dissipativity_checks, divergence_free_basis, pressure_robustness_check, random_in_span};
use hho_core::mesh::{generate_cartesian, generate_hexagonal, PolyMesh};
use hho_core::solver::DofMap;
use hho_core::{Point, Vector};

fn random_locals(rng: &mut ChaCha8Rng, forms: &FormMatrices) -> Vec<DVector<f64>> {
    forms
        .elements
        .iter()
        .map(|ef| DVector::from_fn(ef.n_local(), |_, _| rng.random_range(-1.0..1.0)))
        .collect()
}

fn div_free_locals(rng: &mut ChaCha8Rng, mesh: &PolyMesh, forms: &FormMatrices) -> Vec<DVector<f64>> {
    let d = DofMap::new(mesh, forms.k);
    let basis = divergence_free_basis(forms, &d);
    d.gather(&random_in_span(rng, &basis))
}

#[test]
fn viscous_form_kernel_is_constant_fields() {
    for mesh in [generate_cartesian(2), generate_hexagonal(1)] {
        for k in 0..=2 {
            let forms = FormMatrices::build(&mesh, k, 0).unwrap();
            for ef in &forms.elements {
                let a = &ef.viscous;
                assert!((a - a.transpose()).amax() < 1e-12 * a.amax());
                let mut eig: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
                eig.sort_by(f64::total_cmp);
                let top = eig[eig.len() - 1];
                assert!(eig[1].abs() < 1e-10 * top, "k={k}: {eig:?}");
                assert!(eig[2] > 1e-6 * top, "k={k}: third eigenvalue {} of {top}", eig[2]);
            }
        }
    }
}

#[test]
fn unsteady_form_is_symmetric_positive_definite() {
    let forms = FormMatrices::build(&generate_hexagonal(1), 1, 0).unwrap();
    for ef in &forms.elements {
        let m = &ef.recon.unsteady;
        assert!((m - m.transpose()).amax() < 1e-12 * m.amax());
        let min = m.symmetric_eigenvalues().min();
        assert!(min > 1e-8 * m.amax(), "min eigenvalue {min}");
    }
}

#[test]
fn coupling_of_affine_fields() {
    let mesh = generate_cartesian(2);
    let forms = FormMatrices::build(&mesh, 1, 0).unwrap();
    for (e, ef) in forms.elements.iter().enumerate() {
        let b = &ef.recon.bases;
        // b_T(I(x, -y), .) = 0 and b_T(I(x, 0), 1) = -|T|.
        let solenoidal = b.interpolate(&|p: &Point| Vector::new(p.x, -p.y));
        assert!((&ef.coupling * solenoidal).amax() < 1e-12);
        let stretch = &ef.coupling * b.interpolate(&|p: &Point| Vector::new(p.x, 0.0));
        let area = mesh.elements[e].area;
        let phi0 = b.cell.eval(&b.center)[0];
        assert!((stretch[0] / phi0 + area).abs() < 1e-12, "{} vs {}", stretch[0] / phi0, -area);
        assert!(stretch.rows(1, stretch.len() - 1).amax() < 1e-12);
    }
}

#[test]
fn body_force_of_constant_field_on_interpolate() {
    let mesh = generate_hexagonal(1);
    let forms = FormMatrices::build(&mesh, 1, 0).unwrap();
    let d = DofMap::new(&mesh, 1);
    let c = Vector::new(0.3, -1.2);
    let v = d.gather(&d.interpolate(&forms, &|_| Vector::new(2.0, 1.0)));
    let load = body_force(&forms, &|_| c, &v);
    assert!((load - c.dot(&Vector::new(2.0, 1.0))).abs() < 1e-12);
}

#[test]
fn convection_is_linear_in_advected_and_test_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mesh = generate_cartesian(3);
    let forms = FormMatrices::build(&mesh, 1, 0).unwrap();
    let w = div_free_locals(&mut rng, &mesh, &forms);
    let blocks = convection_assemble(&forms, &ConvectionContext::new(&forms, w).unwrap());
    let (v1, v2, z) = (random_locals(&mut rng, &forms), random_locals(&mut rng, &forms), random_locals(&mut rng, &forms));
    let (a, b) = (0.7, -2.3);
    let combo: Vec<_> = v1.iter().zip(&v2).map(|(x, y)| x * a + y * b).collect();
    let lhs = trilinear(&forms, &blocks, &combo, &z);
    let rhs = a * trilinear(&forms, &blocks, &v1, &z) + b * trilinear(&forms, &blocks, &v2, &z);
    assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
    let z2: Vec<_> = z.iter().map(|x| x * 3.0).collect();
    let scaled = trilinear(&forms, &blocks, &v1, &z2);
    assert!((scaled - 3.0 * trilinear(&forms, &blocks, &v1, &z)).abs() < 1e-10 * (1.0 + scaled.abs()));
}

#[test]
fn convection_with_zero_transport_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mesh = generate_hexagonal(1);
    let forms = FormMatrices::build(&mesh, 1, 0).unwrap();
    let ctx = ConvectionContext::zero(&forms);
    let blocks = convection_assemble(&forms, &ctx);
    let v = random_locals(&mut rng, &forms);
    assert_eq!(trilinear(&forms, &blocks, &v, &v), 0.0);
    assert_eq!(upwind_dissipation(&forms, &ctx, &v), 0.0);
    assert_eq!(penalty_energy(&forms, &ctx, &v), 0.0);
}

#[test]
fn transport_must_be_divergence_free() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let forms = FormMatrices::build(&generate_cartesian(2), 1, 0).unwrap();
    let w = random_locals(&mut rng, &forms);
    assert!(matches!(ConvectionContext::new(&forms, w), Err(hho_core::Error::TransportNotDivergenceFree(_))));
}

#[test]
fn convection_is_dissipative() {
    for (mesh, k) in [(generate_cartesian(2), 0), (generate_cartesian(2), 2), (generate_hexagonal(1), 1)] {
        for c in dissipativity_checks(&mesh, k, 10, 6).unwrap() {
            assert!(c.passed, "k={k}: {c}");
        }
    }
}

#[test]
fn gradient_loads_vanish_on_divergence_free_fields() {
    for (mesh, k) in [(generate_cartesian(3), 0), (generate_cartesian(3), 2), (generate_hexagonal(1), 1)] {
        let c = pressure_robustness_check(&mesh, k, 5, 8).unwrap();
        assert!(c.passed, "k={k}: {c}");
    }
}
