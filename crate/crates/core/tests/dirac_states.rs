use hopfion::dirac::{
    current_conservation_residual, dirac_residual, four_current, four_current_closed_form, inverse_norm_square,
    mz_ratios, norm_integral, BispinorKind,
};
use hopfion::numerics::{integrate_1d, Interval, Scheme3d};
use hopfion::{Complex64, PacketParams, SpaceTimePoint, ToleranceConfig};
use proptest::prelude::*;
use std::f64::consts::PI;

fn kind() -> impl Strategy<Value = BispinorKind> {
    prop::sample::select(BispinorKind::ALL.to_vec())
}

fn point() -> impl Strategy<Value = SpaceTimePoint> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z, t)| SpaceTimePoint::new(x, y, z, t))
}

#[test]
fn normalization_by_momentum_integral() {
    // (2π^{5/2} N²/m²)(n!/Γ(n+3/2)) ∫ (p/m)^{2n} p² e^{−2aE} dp = 1, with E = √(m² + p²)
    let tol = ToleranceConfig::special_functions();
    for (n, a, m) in [(0u32, 1.0, 1.0), (1, 2.0, 1.0), (2, 0.5, 2.0)] {
        let integral = integrate_1d(
            |p: f64| (p / m).powi(2 * n as i32) * p * p * (-2.0 * a * ((m * m + p * p).sqrt() - m)).exp(),
            Interval::SemiInfinite(0.0),
            &tol,
        )
        .unwrap()
        .value
            * (-2.0 * a * m).exp();
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let gamma_half = (0..=n).map(|k| k as f64 + 0.5).product::<f64>() * PI.sqrt();
        let inv_n2 = 2.0 * PI.powf(2.5) / (m * m) * fact / gamma_half * integral;
        let closed = inverse_norm_square(n, a, m).unwrap();
        assert!((inv_n2 / closed - 1.0).abs() < 1e-8, "n={n}: {inv_n2} vs {closed}");
    }
}

#[test]
fn norm_integral_examples() {
    let tol = ToleranceConfig::quadrature_3d();
    for (kind, l, a) in [
        (BispinorKind::PsiPlus, 0, 1.0),
        (BispinorKind::PsiMinus, 1, 2.0),
        (BispinorKind::PhiPlus, 0, 0.5),
    ] {
        let p = PacketParams::rest(1.0, a, l).unwrap();
        let r = norm_integral(kind, &p, Scheme3d::Spherical, &tol).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{kind}: {}", r.value);
    }
}

#[test]
fn boosted_states_stay_normalized() {
    let tol = ToleranceConfig::quadrature_3d();
    for kind in BispinorKind::ALL {
        let p = PacketParams::new(1.0, 1.0, 0, 0.9).unwrap();
        let r = norm_integral(kind, &p, Scheme3d::Axisymmetric, &tol).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{kind}: {}", r.value);
    }
}

#[test]
fn mz_is_component_independent() {
    let p = SpaceTimePoint::new(0.6, -0.3, 0.4, 0.7);
    for kind in BispinorKind::ALL {
        let params = PacketParams::rest(1.0, 1.0, 2).unwrap();
        for ratio in mz_ratios(kind, &p, &params).unwrap().into_iter().flatten() {
            assert!((ratio - Complex64::new(2.5, 0.0)).norm() < 1e-6, "{kind}: {ratio}");
        }
    }
}

#[test]
fn mz_of_psi_minus_l3() {
    let params = PacketParams::rest(1.0, 1.0, 3).unwrap();
    let p = SpaceTimePoint::new(0.2, 0.5, -0.1, 0.3);
    let mz = hopfion::dirac::mz_check(BispinorKind::PsiMinus, &p, &params).unwrap();
    assert!((mz.re - 3.5).abs() < 1e-6 && mz.im.abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dirac_equation_holds(kind in kind(), l in 0u32..3, v in prop::sample::select(vec![0.0, 0.5, 0.99]), p in point()) {
        let params = PacketParams::new(1.0, 1.0, l, v).unwrap();
        let r = dirac_residual(kind, &p, &params).unwrap();
        prop_assert!(r < 1e-6, "{} l={} v={}: {}", kind, l, v, r);
    }

    #[test]
    fn current_is_causal_and_conserved(kind in kind(), l in 0u32..3, v in prop::sample::select(vec![0.0, 0.9]), p in point()) {
        let params = PacketParams::new(1.0, 1.0, l, v).unwrap();
        let j = four_current(kind, &p, &params).unwrap();
        prop_assert!(j.j0 >= 0.0);
        prop_assert!(j.interval() >= -1e-12 * j.j0 * j.j0);
        let r = current_conservation_residual(kind, &p, &params).unwrap();
        prop_assert!(r < 1e-6, "{}: {}", kind, r);
    }

    #[test]
    fn closed_form_current_agrees(plus in any::<bool>(), l in 0u32..3, p in point(), a in 0.3..3.0f64) {
        let kind = if plus { BispinorKind::PsiPlus } else { BispinorKind::PsiMinus };
        let params = PacketParams::rest(1.0, a, l).unwrap();
        let bil = four_current(kind, &p, &params).unwrap();
        let closed = four_current_closed_form(kind, &p, &params).unwrap();
        for mu in 0..4 {
            prop_assert!((bil.component(mu) - closed.component(mu)).abs() <= 1e-10 * bil.j0);
        }
    }

    #[test]
    fn density_mirror_symmetry(l in 0u32..3, p in point()) {
        let params = PacketParams::rest(1.0, 1.0, l).unwrap();
        let plus = four_current(BispinorKind::PsiPlus, &p, &params).unwrap().j0;
        let mirrored = SpaceTimePoint::new(p.x, p.y, -p.z, p.t);
        let minus = four_current(BispinorKind::PsiMinus, &mirrored, &params).unwrap().j0;
        prop_assert!((plus - minus).abs() <= 1e-12 * plus.max(1e-300));
    }
}

#[test]
fn momentum_and_position_charges_agree() {
    let tol = ToleranceConfig::quadrature_3d();
    for (kind, l, a) in [
        (BispinorKind::PsiPlus, 0, 10.0),
        (BispinorKind::PhiMinus, 2, 0.5),
        (BispinorKind::PsiMinus, 1, 1.0),
    ] {
        let p = PacketParams::rest(1.0, a, l).unwrap();
        let q = hopfion::dirac::norm_momentum_integral(kind, &p, &ToleranceConfig::special_functions()).unwrap();
        let r = norm_integral(kind, &p, Scheme3d::Axisymmetric, &tol).unwrap().value;
        assert!((q - 1.0).abs() < 1e-8 && (r - q).abs() < 1e-6, "{kind}: {q} {r}");
    }
}
