use hopfion::kg_fields::dalembert_residual;
use hopfion::maxwell::{derived_em, maxwell_residual, rs_vector, rs_vector_mirror, velocity_maxwell};
use hopfion::{Complex64, SpaceTimePoint, Vec3};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = SpaceTimePoint> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, z, t)| SpaceTimePoint::new(x, y, z, t))
}

/// `R_φ⁻¹ F(R_φ p)`.
fn rotated_back(p: &SpaceTimePoint, a: f64, l: u32, phi: f64) -> [Complex64; 3] {
    let f = rs_vector(&p.rotated_z(phi), a, l).unwrap();
    let (s, c) = phi.sin_cos();
    [c * f.fx + s * f.fy, -s * f.fx + c * f.fy, f.fz]
}

#[test]
fn rotation_eigenvalue_is_l_plus_one() {
    let p = SpaceTimePoint::new(0.4, -0.3, 0.2, 0.5);
    for l in 0..3 {
        for phi in [0.3, 1.1, 2.5] {
            let back = rotated_back(&p, 1.0, l, phi);
            let f = rs_vector(&p, 1.0, l).unwrap().components();
            let phase = Complex64::from_polar(1.0, (l as f64 + 1.0) * phi);
            for k in 0..3 {
                assert!(
                    (back[k] - phase * f[k]).norm() < 1e-13 * f[k].norm().max(1e-300),
                    "l={l} k={k}"
                );
            }
        }
    }
}

#[test]
fn feeding_scalar_solves_wave_equation() {
    let p = SpaceTimePoint::new(0.3, 0.6, -0.2, 0.4);
    for l in 0..3 {
        assert!(dalembert_residual(&p, 1.0, l).unwrap() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_is_null(l in 0u32..3, p in point(), a in 0.3..3.0f64) {
        let f = rs_vector(&p, a, l).unwrap();
        prop_assert!(f.null_defect() < 1e-12);
    }

    #[test]
    fn energy_moves_at_light_speed(l in 0u32..3, p in point(), a in 0.3..3.0f64) {
        let em = derived_em(&rs_vector(&p, a, l).unwrap()).unwrap();
        prop_assert!(em.u >= 0.0);
        prop_assert!((em.vm.norm() - 1.0).abs() < 1e-10);
        prop_assert!((velocity_maxwell(&p, a).unwrap().norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_velocity_matches_field(l in 0u32..3, p in point(), a in 0.3..3.0f64) {
        let closed = velocity_maxwell(&p, a).unwrap();
        let mirror = derived_em(&rs_vector_mirror(&p, a, l).unwrap()).unwrap().vm;
        prop_assert!((closed - mirror).norm() < 1e-10);
        // the unmirrored field moves the opposite way at the reflected point
        let reflected = SpaceTimePoint::new(-p.x, -p.y, -p.z, p.t);
        let direct = derived_em(&rs_vector(&reflected, a, l).unwrap()).unwrap().vm;
        prop_assert!((closed + direct).norm() < 1e-10);
    }

    #[test]
    fn maxwell_equations_hold(l in 0u32..3, p in point()) {
        prop_assert!(maxwell_residual(&p, 1.0, l).unwrap() < 1e-6);
    }

    #[test]
    fn velocity_independent_of_winding(p in point()) {
        let v: Vec<Vec3> = (0..3)
            .map(|l| derived_em(&rs_vector_mirror(&p, 1.0, l).unwrap()).unwrap().vm)
            .collect();
        prop_assert!((v[0] - v[1]).norm() < 1e-12 && (v[0] - v[2]).norm() < 1e-12);
    }
}
