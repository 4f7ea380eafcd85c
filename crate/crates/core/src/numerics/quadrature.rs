//! Globally adaptive Gauss–Kronrod (7/15) quadrature with QUADPACK-style
//! error rescaling, plus nested spherical-coordinate integrals in 3D.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ToleranceConfig, Vec3};
use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values an integrand may return.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    fn scale(self, factor: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<V> {
    pub value: V,
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    Finite(f64, f64),
    /// `[lo, +inf)`, mapped onto `[0, 1)` by `x = lo + u / (1 - u)`.
    SemiInfinite(f64),
}

/// How a three-dimensional integral is reduced to nested 1D integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme3d {
    /// Nested r, θ, φ.
    Spherical,
    /// r, θ only, for integrands symmetric about the z axis.
    Axisymmetric,
}

struct Segment<V> {
    lo: f64,
    hi: f64,
    value: V,
    error: f64,
    abs: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_15<V, F>(f: &F, lo: f64, hi: f64) -> Result<(V, f64, f64)>
where
    V: QuadValue,
    F: Fn(f64) -> Result<V>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut kronrod = fc.scale(WGK[7]);
    let mut gauss = fc.scale(WG[3]);
    let mut abs_sum = fc.magnitude() * WGK[7];
    let mut samples = [(V::zero(), V::zero()); 7];
    for (j, sample) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        kronrod = kronrod + (f1 + f2).scale(WGK[j]);
        abs_sum += (f1.magnitude() + f2.magnitude()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2).scale(WG[j / 2]);
        }
        *sample = (f1, f2);
    }
    let mean = kronrod.scale(0.5);
    let mut asc = (fc - mean).magnitude() * WGK[7];
    for (j, (f1, f2)) in samples.iter().enumerate() {
        asc += ((*f1 - mean).magnitude() + (*f2 - mean).magnitude()) * WGK[j];
    }
    let value = kronrod.scale(half);
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = (kronrod - gauss).scale(half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !err.is_finite() {
        return Err(Error::Domain("integrand produced a non-finite value".into()));
    }
    Ok((value, err, res_abs))
}

/// Adaptive integral of an infallible integrand.
pub fn integrate_1d<V, F>(f: F, interval: Interval, tol: &ToleranceConfig) -> Result<QuadratureResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    try_integrate_1d(|x| Ok(f(x)), interval, tol)
}

/// Adaptive integral of a fallible integrand; the first integrand error aborts.
pub fn try_integrate_1d<V, F>(f: F, interval: Interval, tol: &ToleranceConfig) -> Result<QuadratureResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> Result<V>,
{
    tol.validate()?;
    match interval {
        Interval::Finite(lo, hi) => {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::InvalidParams(format!("bad interval [{lo}, {hi}]")));
            }
            if lo == hi {
                return Ok(QuadratureResult {
                    value: V::zero(),
                    error_estimate: 0.0,
                    evaluations: 1,
                });
            }
            if lo > hi {
                let r = adaptive(&f, hi, lo, tol)?;
                return Ok(QuadratureResult {
                    value: r.value.scale(-1.0),
                    ..r
                });
            }
            adaptive(&f, lo, hi, tol)
        }
        Interval::SemiInfinite(lo) => {
            if !lo.is_finite() {
                return Err(Error::InvalidParams(format!("bad lower limit {lo}")));
            }
            let mapped = |u: f64| -> Result<V> {
                let w = 1.0 - u;
                let x = lo + u / w;
                Ok(f(x)?.scale(1.0 / (w * w)))
            };
            adaptive(&mapped, 0.0, 1.0, tol)
        }
    }
}

fn adaptive<V, F>(f: &F, lo: f64, hi: f64, tol: &ToleranceConfig) -> Result<QuadratureResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> Result<V>,
{
    let (value, error, abs) = kronrod_15(f, lo, hi)?;
    let mut evaluations = 15;
    let mut total = value;
    let mut total_err = error;
    let mut total_abs = abs;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        lo,
        hi,
        value,
        error,
        abs,
    });
    let min_width = (hi - lo).abs() * 1e-13;

    loop {
        // the last term is the round-off floor for integrands that cancel
        let target = tol
            .abs_tol
            .max(tol.rel_tol * total.magnitude())
            .max(100.0 * f64::EPSILON * total_abs);
        if total_err <= target {
            return Ok(QuadratureResult {
                value: total,
                error_estimate: total_err,
                evaluations,
            });
        }
        if evaluations + 30 > tol.max_evals {
            return Err(Error::NonConvergence {
                evaluations,
                error_estimate: total_err,
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.lo + worst.hi);
        if worst.hi - worst.lo < min_width {
            return Err(Error::NonConvergence {
                evaluations,
                error_estimate: total_err,
            });
        }
        let (v1, e1, a1) = kronrod_15(f, worst.lo, mid)?;
        let (v2, e2, a2) = kronrod_15(f, mid, worst.hi)?;
        evaluations += 30;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        total_abs = total_abs - worst.abs + a1 + a2;
        heap.push(Segment {
            lo: worst.lo,
            hi: mid,
            value: v1,
            error: e1,
            abs: a1,
        });
        heap.push(Segment {
            lo: mid,
            hi: worst.hi,
            value: v2,
            error: e2,
            abs: a2,
        });
        // Re-sum periodically to avoid drift in the running totals.
        if heap.len() % 64 == 0 {
            total = heap.iter().fold(V::zero(), |acc, s| acc + s.value);
            total_err = heap.iter().map(|s| s.error).sum();
            total_abs = heap.iter().map(|s| s.abs).sum();
        }
    }
}

/// Inner tolerance for a nested integral, derived from the outer one.
fn inner_tolerance(tol: &ToleranceConfig, volume: f64) -> ToleranceConfig {
    ToleranceConfig {
        rel_tol: (tol.rel_tol * 0.1).max(1e-15),
        abs_tol: (tol.abs_tol * 0.1 / volume.max(1.0)).max(1e-300),
        max_evals: tol.max_evals,
    }
}

/// `∫ f d³r` over the ball `|r| <= r_max` in spherical coordinates.
///
/// `r_max` is the radial truncation; callers pick it from the decay rate
/// of the integrand (see [`crate::kg_fields::PacketParams::radial_cutoff`]).
pub fn integrate_3d<F>(f: F, r_max: f64, tol: &ToleranceConfig) -> Result<QuadratureResult<f64>>
where
    F: Fn(Vec3) -> Result<f64>,
{
    tol.validate()?;
    let evals = Cell::new(0usize);
    let volume = r_max.powi(3);
    let mid_tol = inner_tolerance(tol, volume);
    let inner_tol = inner_tolerance(&mid_tol, 1.0);
    let radial = |r: f64| -> Result<f64> {
        let polar = |theta: f64| -> Result<f64> {
            let (st, ct) = theta.sin_cos();
            let azimuthal = |phi: f64| -> Result<f64> {
                let (sp, cp) = phi.sin_cos();
                f(Vec3::new(r * st * cp, r * st * sp, r * ct))
            };
            let res = try_integrate_1d(azimuthal, Interval::Finite(0.0, 2.0 * PI), &inner_tol)?;
            evals.set(evals.get() + res.evaluations);
            Ok(res.value * st)
        };
        let res = try_integrate_1d(polar, Interval::Finite(0.0, PI), &mid_tol)?;
        Ok(res.value * r * r)
    };
    let res = try_integrate_1d(radial, Interval::Finite(0.0, r_max), tol)?;
    Ok(QuadratureResult {
        value: res.value,
        error_estimate: res.error_estimate,
        evaluations: evals.get().max(1),
    })
}

/// `∫ f d³r` for an integrand depending only on `(rho, z)`; the azimuthal
/// integral is done analytically.
pub fn integrate_axisymmetric<F>(f: F, r_max: f64, tol: &ToleranceConfig) -> Result<QuadratureResult<f64>>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    tol.validate()?;
    let evals = Cell::new(0usize);
    let inner_tol = inner_tolerance(tol, r_max.powi(3));
    let radial = |r: f64| -> Result<f64> {
        let polar = |theta: f64| -> Result<f64> {
            let (st, ct) = theta.sin_cos();
            Ok(f(r * st, r * ct)? * st)
        };
        let res = try_integrate_1d(polar, Interval::Finite(0.0, PI), &inner_tol)?;
        evals.set(evals.get() + res.evaluations);
        Ok(res.value * r * r)
    };
    let res = try_integrate_1d(radial, Interval::Finite(0.0, r_max), tol)?;
    Ok(QuadratureResult {
        value: 2.0 * PI * res.value,
        error_estimate: 2.0 * PI * res.error_estimate,
        evaluations: evals.get().max(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::special_functions()
    }

    #[test]
    fn linear_on_unit_interval() {
        let r = integrate_1d(|x: f64| x, Interval::Finite(0.0, 1.0), &tol()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
        assert!(r.error_estimate >= 0.0);
        assert!(r.evaluations >= 1);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate_1d(|x: f64| x * x, Interval::Finite(2.0, 0.0), &tol()).unwrap();
        assert!((r.value + 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_1d(|x: f64| (-3.0 * x).exp(), Interval::SemiInfinite(0.0), &tol()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn complex_integrand() {
        // ∫_0^π e^{ix} dx = 2i
        let r = integrate_1d(|x: f64| Complex64::new(0.0, x).exp(), Interval::Finite(0.0, PI), &tol()).unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn non_convergence_is_reported() {
        let tight = ToleranceConfig::new(1e-14, 1e-14, 100).unwrap();
        let r = integrate_1d(|x: f64| (1.0 / x).sin(), Interval::Finite(1e-4, 1.0), &tight);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn gaussian_ball() {
        let r = integrate_3d(
            |p| Ok((-p.norm_squared()).exp()),
            8.0,
            &ToleranceConfig::quadrature_3d(),
        )
        .unwrap();
        assert!((r.value - PI.powf(1.5)).abs() < 1e-7 * PI.powf(1.5));
    }

    #[test]
    fn odd_integrand_vanishes() {
        let t = ToleranceConfig::quadrature_3d();
        let r = integrate_3d(|p| Ok(p.x * (-p.norm_squared()).exp()), 8.0, &t).unwrap();
        assert!(r.value.abs() < t.abs_tol, "{}", r.value);
    }

    #[test]
    fn axisymmetric_matches_full() {
        let t = ToleranceConfig::quadrature_3d();
        let g = |rho: f64, z: f64| (-(rho * rho) - 2.0 * (z - 0.3).powi(2)).exp() * (1.0 + rho * rho);
        let full = integrate_3d(|p| Ok(g(p.x.hypot(p.y), p.z)), 9.0, &t).unwrap();
        let axi = integrate_axisymmetric(|rho, z| Ok(g(rho, z)), 9.0, &t).unwrap();
        assert!((full.value - axi.value).abs() < 1e-7 * axi.value.abs());
    }
}
