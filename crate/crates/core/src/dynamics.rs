//! Momentum-space densities, spatial moments, spreading and uncertainty,
//! and charge profiles of moving packets.
//!
//! In momentum space every state is a single plane-wave spinor,
//! `Ψ(r, t) = ∫ d³p e^{i(p·r − Et)} Φ(p)` with
//! `Φ(p) = N/(4π) · (−ip₊/m)^n e^{−aE}/E · u(p)`, `n = l_effective`,
//! where `u` is linear in `(1, E, p_z, p₊, p₋)/m`. Hence
//! `⟨r²⟩(t) = ⟨r²⟩₀ + t²⟨p²/E²⟩`, which is the quadratic spreading law.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirac::{normalization_constant, BispinorKind, DiracState, SpinorField};
use crate::error::{Error, Result};
use crate::kg_fields::{PacketParams, SpaceTimePoint};
use crate::numerics::quadrature::{integrate_3d, integrate_axisymmetric, try_integrate_1d};
use crate::numerics::{Interval, QuadratureResult, Scheme3d, ToleranceConfig, Vec3};

/// Sharp photon bound `(3/2)√(1 + 4√5/9)`, quoted for reference lines only.
pub const PHOTON_UNCERTAINTY_BOUND: f64 = 2.118_033_988_749_895;

/// Non-relativistic floor of `Δr·Δp` in three dimensions.
pub const HEISENBERG_3D: f64 = 1.5;

fn rest_only(params: &PacketParams) -> Result<()> {
    params.validate()?;
    if params.is_boosted() {
        return Err(Error::InvalidParams("momentum-space analysis is for v = 0".into()));
    }
    Ok(())
}

/// `ln(N² e^{−2am})`, finite for any `am`.
fn log_scaled_norm(kind: BispinorKind, params: &PacketParams) -> Result<f64> {
    Ok(2.0 * normalization_constant(kind, params)?.n.ln() - 2.0 * params.a * params.m)
}

/// Momentum density in the form whose integral defines the normalization,
/// `πN²/m^{2n+2} (p_x² + p_y²)^n e^{−2aE}`. It is the p_z-symmetric part of
/// [`spinor_momentum_density`]; both have unit integral.
pub fn momentum_density(kind: BispinorKind, params: &PacketParams, p: &Vec3) -> Result<f64> {
    rest_only(params)?;
    let n = kind.l_effective(params.l) as i32;
    let m = params.m;
    let e = (m * m + p.norm_squared()).sqrt();
    let perp = (p.x * p.x + p.y * p.y) / (m * m);
    let log = log_scaled_norm(kind, params)? - 2.0 * params.a * (e - m);
    Ok(PI / (m * m) * perp.powi(n) * log.exp())
}

/// Exact density `|Φ(p)|²` summed over components,
/// `πN²/m^{2n+2} (p_x² + p_y²)^n e^{−2aE} (E − σp_z)/E` with σ the helicity sign.
pub fn spinor_momentum_density(kind: BispinorKind, params: &PacketParams, p: &Vec3) -> Result<f64> {
    let e = (params.m * params.m + p.norm_squared()).sqrt();
    Ok(momentum_density(kind, params, p)? * (e + kind.helicity_sign() * p.z) / e)
}

/// Coefficients of `u_k` on the basis `(1, E, p_z, p₊, p₋)/m`; the constant
/// term carries no `1/m`.
fn spinor_basis(kind: BispinorKind) -> [[f64; 5]; 4] {
    match kind {
        BispinorKind::PsiPlus => [
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0; 5],
            [0.0, 1.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0, 0.0],
        ],
        BispinorKind::PsiMinus => [
            [0.0, 1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0; 5],
        ],
        BispinorKind::PhiPlus => [
            [0.0; 5],
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -1.0],
            [0.0, 1.0, 1.0, 0.0, 0.0],
        ],
        BispinorKind::PhiMinus => [
            [0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 1.0, -1.0, 0.0, 0.0],
            [0.0; 5],
            [1.0, 0.0, 0.0, 0.0, 0.0],
        ],
    }
}

/// `Σ_k |∇_p (p₊^n e^{−a(E−m)} u_k / E)|²`.
fn amplitude_gradient_sqr(kind: BispinorKind, params: &PacketParams, p: &Vec3) -> f64 {
    let n = kind.l_effective(params.l);
    let (m, a) = (params.m, params.a);
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let e = (m * m + p.norm_squared()).sqrt();
    let pp = Complex64::new(p.x, p.y);
    let pm = pp.conj();
    let basis_val = [
        one,
        Complex64::new(e / m, 0.0),
        Complex64::new(p.z / m, 0.0),
        pp / m,
        pm / m,
    ];
    let zero3 = [Complex64::new(0.0, 0.0); 3];
    let grad_e: [Complex64; 3] = [p.x / (e * m), p.y / (e * m), p.z / (e * m)].map(|v| Complex64::new(v, 0.0));
    let basis_grad = [
        zero3,
        grad_e,
        [0.0, 0.0, 1.0 / m].map(|v| Complex64::new(v, 0.0)),
        [one / m, i / m, Complex64::new(0.0, 0.0)],
        [one / m, -i / m, Complex64::new(0.0, 0.0)],
    ];
    let decay = (-a * (e - m)).exp();
    let scalar = pp.powu(n) * decay / e;
    // ∇ of p₊^n e^{−a(E−m)}/E
    let radial = -(a / e + 1.0 / (e * e));
    let lead = if n > 0 {
        pp.powu(n - 1) * n as f64 * decay / e
    } else {
        Complex64::new(0.0, 0.0)
    };
    let dir = [one, i, Complex64::new(0.0, 0.0)];
    let mut grad_scalar = [Complex64::new(0.0, 0.0); 3];
    for (j, g) in grad_scalar.iter_mut().enumerate() {
        *g = lead * dir[j] + scalar * (radial * p[j]);
    }
    let mut total = 0.0;
    for coeffs in spinor_basis(kind) {
        let mut u = Complex64::new(0.0, 0.0);
        let mut du = zero3;
        for (b, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            u += c * basis_val[b];
            for j in 0..3 {
                du[j] += c * basis_grad[b][j];
            }
        }
        for j in 0..3 {
            total += (grad_scalar[j] * u + scalar * du[j]).norm_sqr();
        }
    }
    total
}

/// Momentum radius beyond which `e^{−2a(E−m)}` times polynomial growth of
/// order `power` has fallen below `abs_tol`.
fn momentum_cutoff(params: &PacketParams, abs_tol: f64, power: u32) -> f64 {
    let decay = (1.0 / abs_tol.clamp(1e-300, 0.5)).ln() + 2.0 * (power as f64 + 4.0);
    let excess = decay / (2.0 * params.a);
    let e = params.m + excess;
    // polynomial prefactors push the bulk out to p ~ n/a; keep a margin
    (e * e - params.m * params.m).sqrt() * 1.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub value: f64,
    pub error: f64,
    pub t: f64,
    pub power: u32,
}

/// `⟨r²⟩₀` from `(2π)³ ∫ |∇_p Φ|² d³p`, independent of any position-space
/// sampling.
pub fn momentum_space_r2(kind: BispinorKind, params: &PacketParams, tol: &ToleranceConfig) -> Result<f64> {
    rest_only(params)?;
    let n = kind.l_effective(params.l) as i32;
    let m = params.m;
    // (2π)³ N²/(16π² m^{2n}) with the e^{−2am} factored into the amplitude
    let log_scale = (PI / 2.0).ln() + log_scaled_norm(kind, params)? - 2.0 * n as f64 * m.ln();
    let p_max = momentum_cutoff(params, tol.abs_tol, 2 * n as u32 + 2);
    let res = integrate_axisymmetric(
        |rho, z| Ok(amplitude_gradient_sqr(kind, params, &Vec3::new(rho, 0.0, z))),
        p_max,
        tol,
    )?;
    Ok(res.value * log_scale.exp())
}

/// `∫ r^power j⁰(r, t) d³r` for the normalized state.
pub fn spatial_moment(
    kind: BispinorKind,
    params: &PacketParams,
    t: f64,
    power: u32,
    scheme: Scheme3d,
    tol: &ToleranceConfig,
) -> Result<MomentResult> {
    let state = DiracState::new(kind, *params, true)?;
    let r_max = params.radial_cutoff(t, tol.abs_tol, power + 2 * kind.l_effective(params.l) + 2);
    let density = |r: Vec3| -> Result<f64> {
        let j0 = state.eval(&SpaceTimePoint::at(r, t))?.norm_sqr();
        Ok(j0 * r.norm().powi(power as i32))
    };
    let res = integrate_with(scheme, density, r_max, tol)?;
    Ok(MomentResult {
        value: res.value,
        error: res.error_estimate,
        t,
        power,
    })
}

fn integrate_with<F>(scheme: Scheme3d, f: F, r_max: f64, tol: &ToleranceConfig) -> Result<QuadratureResult<f64>>
where
    F: Fn(Vec3) -> Result<f64>,
{
    match scheme {
        Scheme3d::Spherical => integrate_3d(f, r_max, tol),
        Scheme3d::Axisymmetric => integrate_axisymmetric(|rho, z| f(Vec3::new(rho, 0.0, z)), r_max, tol),
    }
}

/// `⟨z⟩` at time `t`; `⟨x⟩ = ⟨y⟩ = 0` because `j⁰` is symmetric about the z axis.
pub fn mean_z(kind: BispinorKind, params: &PacketParams, t: f64, tol: &ToleranceConfig) -> Result<f64> {
    let state = DiracState::new(kind, *params, true)?;
    let r_max = params.radial_cutoff(t, tol.abs_tol, 1 + 2 * kind.l_effective(params.l) + 2);
    let res = integrate_axisymmetric(
        |rho, z| Ok(state.eval(&SpaceTimePoint::new(rho, 0.0, z, t))?.norm_sqr() * z),
        r_max,
        tol,
    )?;
    Ok(res.value)
}

/// Isotropic momentum averages `⟨g(|p|)⟩` under the weight
/// `p^{2n+2} e^{−2a(E−m)}`, which both momentum densities share.
fn radial_average<G>(params: &PacketParams, n: u32, tol: &ToleranceConfig, g: G) -> Result<f64>
where
    G: Fn(f64, f64) -> f64,
{
    let m = params.m;
    let weight = |p: f64| {
        let e = (m * m + p * p).sqrt();
        ((p / m).powi(2 * n as i32 + 2) * (-2.0 * params.a * (e - m)).exp(), e)
    };
    let num = try_integrate_1d(
        |p| {
            let (w, e) = weight(p);
            Ok(w * g(p, e))
        },
        Interval::SemiInfinite(0.0),
        tol,
    )?;
    let den = try_integrate_1d(|p| Ok(weight(p).0), Interval::SemiInfinite(0.0), tol)?;
    Ok(num.value / den.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumMoments {
    pub p2: f64,
    /// `⟨p²/E²⟩ = ⟨v²⟩`, the spreading rate.
    pub v2: f64,
    /// `⟨p_z⟩` under the exact spinor density; zero under the symmetric one.
    pub pz: f64,
}

pub fn momentum_moments(kind: BispinorKind, params: &PacketParams, tol: &ToleranceConfig) -> Result<MomentumMoments> {
    rest_only(params)?;
    let n = kind.l_effective(params.l);
    let p2 = radial_average(params, n, tol, |p, _| p * p)?;
    let v2 = radial_average(params, n, tol, |p, e| p * p / (e * e))?;
    let p2_over_e = radial_average(params, n, tol, |p, e| p * p / e)?;
    // ⟨cos²θ⟩ under sin^{2n}θ is 1/(2n+3)
    let pz = kind.helicity_sign() * p2_over_e / (2.0 * n as f64 + 3.0);
    Ok(MomentumMoments { p2, v2, pz })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadingCoefficients {
    /// `A` in `⟨r²⟩ = λ̄²A + B(a² + t²)`.
    pub a_coef: f64,
    pub b_coef: f64,
    /// RMS deviation from the fitted law divided by the mean of `⟨r²⟩`.
    pub fit_residual: f64,
    pub samples: Vec<MomentResult>,
}

/// Default sampling times `0, a/2, a, 3a/2, 2a`.
pub fn default_times(params: &PacketParams) -> Vec<f64> {
    (0..5).map(|k| 0.5 * k as f64 * params.a).collect()
}

/// Least-squares fit of `⟨r²⟩(t)` to `c₀ + B t²`, reported as
/// `λ̄²A + B(a² + t²)`.
pub fn fit_spreading(params: &PacketParams, samples: Vec<MomentResult>) -> Result<SpreadingCoefficients> {
    let mut distinct: Vec<f64> = samples.iter().map(|s| s.t * s.t).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    if distinct.len() < 3 {
        return Err(Error::IllConditioned(format!(
            "spreading fit needs three distinct |t|, got {}",
            distinct.len()
        )));
    }
    let k = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.t * s.t).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let c0 = my - b * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - c0 - b * x).powi(2)).sum::<f64>() / k).sqrt();
    let a = params.a;
    Ok(SpreadingCoefficients {
        a_coef: (c0 - b * a * a) * params.m * params.m,
        b_coef: b,
        fit_residual: rms / my,
        samples,
    })
}

pub fn spreading_fit(
    kind: BispinorKind,
    params: &PacketParams,
    t_samples: &[f64],
    tol: &ToleranceConfig,
) -> Result<SpreadingCoefficients> {
    rest_only(params)?;
    if t_samples.len() < 4 {
        return Err(Error::InvalidParams(format!(
            "spreading fit needs at least four times, got {}",
            t_samples.len()
        )));
    }
    let samples = t_samples
        .par_iter()
        .map(|&t| spatial_moment(kind, params, t, 2, Scheme3d::Axisymmetric, tol))
        .collect::<Result<Vec<_>>>()?;
    fit_spreading(params, samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub dr: f64,
    /// `√(⟨p²⟩ − ⟨p_z⟩²)` with the exact spinor `⟨p_z⟩`.
    pub dp_central: f64,
    /// `√⟨p²⟩`, equal to the central value under the symmetric density.
    pub dp_raw: f64,
    pub mean_z: f64,
    pub mean_pz: f64,
    /// `Δr·Δp` with central moments; the primary convention.
    pub product: f64,
    pub product_raw: f64,
}

/// `Δr·Δp` at `t = 0` in units of ħ.
pub fn uncertainty_product(
    kind: BispinorKind,
    params: &PacketParams,
    tol: &ToleranceConfig,
) -> Result<UncertaintyReport> {
    rest_only(params)?;
    let r2 = spatial_moment(kind, params, 0.0, 2, Scheme3d::Axisymmetric, tol)?.value;
    let z = mean_z(kind, params, 0.0, tol)?;
    let mom = momentum_moments(kind, params, tol)?;
    let dr = (r2 - z * z).sqrt();
    let dp_central = (mom.p2 - mom.pz * mom.pz).sqrt();
    let dp_raw = mom.p2.sqrt();
    Ok(UncertaintyReport {
        dr,
        dp_central,
        dp_raw,
        mean_z: z,
        mean_pz: mom.pz,
        product: dr * dp_central,
        product_raw: dr * dp_raw,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) || count < 2 {
            return Err(Error::InvalidParams(format!(
                "axis needs min < max and count >= 2, got [{min}, {max}] x {count}"
            )));
        }
        Ok(Self { min, max, count })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + self.step() * i as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// `j⁰` on the `y = 0` plane; `values[iz][ix]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeProfile {
    pub x: Axis,
    pub z: Axis,
    pub t: f64,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileMoments {
    pub mean_x: f64,
    pub mean_z: f64,
    /// Central second moments over the plane.
    pub xx: f64,
    pub zz: f64,
    /// `∫ j⁰ d³r` from the plane, using the axial symmetry (`π|x| dx dz`).
    pub mass: f64,
}

impl ChargeProfile {
    pub fn moments(&self) -> ProfileMoments {
        let (mut w, mut sx, mut sz, mut mass) = (0.0, 0.0, 0.0, 0.0);
        let cell = self.x.step() * self.z.step();
        for (iz, row) in self.values.iter().enumerate() {
            let z = self.z.value(iz);
            for (ix, &v) in row.iter().enumerate() {
                let x = self.x.value(ix);
                w += v;
                sx += v * x;
                sz += v * z;
                mass += v * PI * x.abs() * cell;
            }
        }
        let (mx, mz) = (sx / w, sz / w);
        let (mut xx, mut zz) = (0.0, 0.0);
        for (iz, row) in self.values.iter().enumerate() {
            let z = self.z.value(iz) - mz;
            for (ix, &v) in row.iter().enumerate() {
                let x = self.x.value(ix) - mx;
                xx += v * x * x;
                zz += v * z * z;
            }
        }
        ProfileMoments {
            mean_x: mx,
            mean_z: mz,
            xx: xx / w,
            zz: zz / w,
            mass,
        }
    }
}

pub fn charge_profile(kind: BispinorKind, params: &PacketParams, x: Axis, z: Axis, t: f64) -> Result<ChargeProfile> {
    let state = DiracState::new(kind, *params, true)?;
    let values = (0..z.count)
        .into_par_iter()
        .map(|iz| {
            let zv = z.value(iz);
            (0..x.count)
                .map(|ix| Ok(state.eval(&SpaceTimePoint::new(x.value(ix), 0.0, zv, t))?.norm_sqr()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChargeProfile { x, z, t, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::bessel_k;

    #[test]
    fn axis_rejects_degenerate() {
        assert!(Axis::new(1.0, 1.0, 10).is_err());
        assert!(Axis::new(0.0, 1.0, 1).is_err());
        let a = Axis::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(a.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn p2_matches_bessel_ratio() {
        // ⟨p²⟩ = m²(n + 3/2) K_{n+3}(2am) / (am K_{n+2}(2am))
        let tol = ToleranceConfig::special_functions();
        for (l, a, m) in [(0, 1.0, 1.0), (2, 0.7, 1.3)] {
            let params = PacketParams::rest(m, a, l).unwrap();
            let mom = momentum_moments(BispinorKind::PsiPlus, &params, &tol).unwrap();
            let z = Complex64::new(2.0 * a * m, 0.0);
            let n = l as usize;
            let want =
                m * m * (n as f64 + 1.5) * bessel_k(n + 3, z).unwrap().re / (a * m * bessel_k(n + 2, z).unwrap().re);
            assert!((mom.p2 / want - 1.0).abs() < 1e-9, "{} vs {want}", mom.p2);
        }
    }

    #[test]
    fn pz_sign_follows_helicity() {
        let tol = ToleranceConfig::special_functions();
        let params = PacketParams::rest(1.0, 1.0, 0).unwrap();
        let plus = momentum_moments(BispinorKind::PsiPlus, &params, &tol).unwrap().pz;
        let minus = momentum_moments(BispinorKind::PsiMinus, &params, &tol).unwrap().pz;
        assert!(plus < 0.0 && (plus + minus).abs() < 1e-14);
    }

    #[test]
    fn fit_rejects_degenerate_times() {
        let params = PacketParams::rest(1.0, 1.0, 0).unwrap();
        let s = |t: f64| MomentResult {
            value: 1.0 + t * t,
            error: 0.0,
            t,
            power: 2,
        };
        let r = fit_spreading(&params, vec![s(0.0), s(1.0), s(-1.0), s(0.0)]);
        assert!(matches!(r, Err(Error::IllConditioned(_))));
        let ok = fit_spreading(&params, vec![s(0.0), s(1.0), s(2.0), s(3.0)]).unwrap();
        assert!((ok.b_coef - 1.0).abs() < 1e-12 && ok.fit_residual < 1e-12);
    }
}
