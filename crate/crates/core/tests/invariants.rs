use std::sync::OnceLock;

use proptest::prelude::*;

use hho_core::forms::FormMatrices;
use hho_core::harness::{dissipativity_checks, eoc, MeshSource, StudyConfig};
use hho_core::mesh::{generate_cartesian, generate_hexagonal, PolyMesh};
use hho_core::{Point, Vector};

fn meshes() -> &'static [(PolyMesh, FormMatrices)] {
    static POOL: OnceLock<Vec<(PolyMesh, FormMatrices)>> = OnceLock::new();
    POOL.get_or_init(|| {
        [generate_cartesian(2), generate_hexagonal(1)]
            .into_iter()
            .map(|m| {
                let f = FormMatrices::build(&m, 1, 0).unwrap();
                (m, f)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eoc_recovers_power_laws(c in 1e-3f64..1e3, p in 0.5f64..4.0, h0 in 0.05f64..1.0, ratio in 1.5f64..3.0) {
        let h = [h0, h0 / ratio, h0 / ratio / ratio];
        let e: Vec<f64> = h.iter().map(|x| c * x.powf(p)).collect();
        for r in eoc(&e, &h) {
            prop_assert!((r - p).abs() < 1e-9);
        }
    }

    #[test]
    fn reconstruction_of_affine_interpolates_is_exact(
        which in 0usize..2,
        coef in prop::array::uniform6(-2.0f64..2.0),
        bary in (0.0f64..1.0, 0.0f64..1.0),
    ) {
        let (mesh, forms) = &meshes()[which];
        let v = |p: &Point| Vector::new(coef[0] + coef[1] * p.x + coef[2] * p.y, coef[3] + coef[4] * p.x + coef[5] * p.y);
        let (s, t) = if bary.0 + bary.1 > 1.0 { (1.0 - bary.0, 1.0 - bary.1) } else { bary };
        for (e, ef) in forms.elements.iter().enumerate() {
            let r = &ef.recon.reconstruction * ef.recon.bases.interpolate(&v);
            for (tau, simplex) in mesh.elements[e].submesh.triangles.iter().enumerate() {
                let [a, b, c] = simplex.vertices;
                let p = a + (b - a) * s + (c - a) * t;
                prop_assert!((ef.recon.eval_reconstruction(&r, tau, &p) - v(&p)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn convection_is_dissipative_for_any_seed(seed in any::<u64>(), k in 0usize..3) {
        for c in dissipativity_checks(&generate_cartesian(2), k, 2, seed).unwrap() {
            prop_assert!(c.passed, "{}", c);
        }
    }

    #[test]
    fn config_lists_round_trip(nus in prop::collection::vec(1e-12f64..1.0, 1..5), ns in prop::collection::vec(1usize..64, 1..5)) {
        let nu_text = nus.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ");
        let mesh_text = ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ");
        let text = format!("mesh_files = {mesh_text}\nnu_list = {nu_text}\n");
        let cfg = StudyConfig::parse(&text, std::path::Path::new(".")).unwrap();
        prop_assert_eq!(cfg.nu_list, nus);
        prop_assert_eq!(cfg.meshes, ns.into_iter().map(MeshSource::Cartesian).collect::<Vec<_>>());
    }
}
