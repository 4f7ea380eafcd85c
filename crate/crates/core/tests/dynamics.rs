use hopfion::dirac::BispinorKind;
use hopfion::dynamics::*;
use hopfion::numerics::{integrate_axisymmetric, Scheme3d};
use hopfion::{PacketParams, ToleranceConfig, Vec3};
use proptest::prelude::*;

fn tol() -> ToleranceConfig {
    ToleranceConfig::quadrature_3d()
}

fn r2(kind: BispinorKind, p: &PacketParams, t: f64) -> f64 {
    spatial_moment(kind, p, t, 2, Scheme3d::Axisymmetric, &tol())
        .unwrap()
        .value
}

#[test]
fn momentum_densities_are_normalized() {
    for l in 0..3 {
        for kind in BispinorKind::ALL {
            let p = PacketParams::rest(1.0, 1.0, l).unwrap();
            for density in [momentum_density, spinor_momentum_density] {
                let total = integrate_axisymmetric(|rho, z| density(kind, &p, &Vec3::new(rho, 0.0, z)), 40.0, &tol())
                    .unwrap()
                    .value;
                assert!((total - 1.0).abs() < 1e-6, "{kind} l={l}: {total}");
            }
        }
    }
}

#[test]
fn momentum_density_vanishes_on_axis_for_winding() {
    let p = PacketParams::rest(1.0, 1.0, 1).unwrap();
    for kind in BispinorKind::ALL {
        assert!(momentum_density(kind, &p, &Vec3::new(0.0, 0.0, 0.8)).unwrap() < 1e-30);
        assert!(momentum_density(kind, &p, &Vec3::new(0.5, 0.0, 0.8)).unwrap() > 1e-6);
    }
}

#[test]
fn width_matches_momentum_space() {
    for l in 0..3 {
        for a in [0.5, 2.0] {
            let p = PacketParams::rest(1.0, a, l).unwrap();
            let oracle = momentum_space_r2(BispinorKind::PsiPlus, &p, &tol()).unwrap();
            let direct = r2(BispinorKind::PsiPlus, &p, 0.0);
            assert!(
                (oracle - direct).abs() < 1e-4 * oracle,
                "l={l} a={a}: {oracle} vs {direct}"
            );
        }
    }
}

#[test]
fn width_is_even_and_grows() {
    let p = PacketParams::rest(1.0, 1.0, 0).unwrap();
    let w0 = r2(BispinorKind::PsiPlus, &p, 0.0);
    let mut prev = w0;
    for t in [0.5, 1.0, 2.0] {
        let fwd = r2(BispinorKind::PsiPlus, &p, t);
        let back = r2(BispinorKind::PsiPlus, &p, -t);
        assert!((fwd - back).abs() < 1e-6 * fwd);
        assert!(fwd > prev);
        prev = fwd;
    }
}

#[test]
fn width_grows_at_mean_squared_velocity() {
    let p = PacketParams::rest(1.0, 1.0, 0).unwrap();
    let w: Vec<f64> = [0.0, 1.0, 2.0]
        .iter()
        .map(|&t| r2(BispinorKind::PsiPlus, &p, t))
        .collect();
    // quadratic in t through the first two samples predicts the third
    let b = w[1] - w[0];
    assert!((w[0] + 4.0 * b - w[2]).abs() < 1e-6 * w[2]);
    let v2 = momentum_moments(BispinorKind::PsiPlus, &p, &tol()).unwrap().v2;
    assert!((b - v2).abs() < 1e-6, "{b} vs {v2}");
}

#[test]
fn spreading_coefficient_falls_with_size() {
    for l in 0..3 {
        let mut prev = 1.0;
        for a in [0.5, 1.0, 2.0, 5.0] {
            let p = PacketParams::rest(1.0, a, l).unwrap();
            let fit = spreading_fit(BispinorKind::PsiPlus, &p, &default_times(&p), &tol()).unwrap();
            assert!(fit.b_coef > 0.0 && fit.b_coef < prev, "l={l} a={a}: {}", fit.b_coef);
            assert!(fit.fit_residual < 1e-4);
            prev = fit.b_coef;
        }
    }
}

#[test]
fn fit_needs_three_distinct_times() {
    let p = PacketParams::rest(1.0, 1.0, 0).unwrap();
    let err = spreading_fit(BispinorKind::PsiPlus, &p, &[0.0, 1.0, -1.0, 1.0], &tol());
    assert!(err.is_err());
    assert!(spreading_fit(BispinorKind::PsiPlus, &p, &[0.0, 1.0], &tol()).is_err());
}

#[test]
fn uncertainty_approaches_heisenberg_for_large_packets() {
    let mut prev = f64::INFINITY;
    for a in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let p = PacketParams::rest(1.0, a, 0).unwrap();
        let u = uncertainty_product(BispinorKind::PsiPlus, &p, &tol()).unwrap();
        assert!(u.product > HEISENBERG_3D && u.product < prev, "a={a}: {}", u.product);
        assert!(u.product_raw >= u.product);
        prev = u.product;
    }
    assert!(prev < 1.05 * HEISENBERG_3D);
}

#[test]
fn rest_profile_is_symmetric() {
    let p = PacketParams::rest(1.0, 1.0, 0).unwrap();
    let ax = Axis::new(-6.0, 6.0, 201).unwrap();
    let prof = charge_profile(BispinorKind::PsiPlus, &p, ax, ax, 0.0).unwrap();
    let n = ax.count;
    for iz in 0..n {
        for ix in 0..n {
            let v = prof.values[iz][ix];
            assert!((v - prof.values[iz][n - 1 - ix]).abs() <= 1e-12 * v.max(1e-300));
        }
    }
    let m = prof.moments();
    assert!((m.xx / m.zz - 1.0).abs() < 1e-10);
    assert!((m.mass - 1.0).abs() < 2e-3);
}

#[test]
fn boosted_profile_contracts_along_motion() {
    let ax = Axis::new(-6.0, 6.0, 201).unwrap();
    let mut prev = f64::INFINITY;
    for v in [0.0, 0.9, 0.99] {
        let p = PacketParams::new(1.0, 1.0, 0, v).unwrap();
        let m = charge_profile(BispinorKind::PsiPlus, &p, ax, ax, 0.0)
            .unwrap()
            .moments();
        let ratio = m.zz / m.xx;
        assert!(ratio < prev, "v={v}: {ratio}");
        assert!((m.mass - 1.0).abs() < 2e-3);
        prev = ratio;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn spinor_mean_momentum_follows_helicity(l in 0u32..3, a in 0.3..5.0f64) {
        let p = PacketParams::rest(1.0, a, l).unwrap();
        for kind in BispinorKind::ALL {
            let mm = momentum_moments(kind, &p, &ToleranceConfig::default()).unwrap();
            prop_assert!(mm.v2 > 0.0 && mm.v2 < 1.0);
            prop_assert!(mm.pz * kind.helicity_sign() > 0.0);
            prop_assert!(mm.pz * mm.pz < mm.p2);
        }
    }
}
