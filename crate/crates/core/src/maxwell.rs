//! The Maxwell hopfion in Riemann–Silberstein form, `F = (E + iB)/√2`,
//! which satisfies `i∂_t F = ∇×F`, `∇·F = 0`.
//!
//! `F = x₊^l / s^{2l+6} · (t₊² − x₊², i(t₊² + x₊²), −2t₊x₊)` with
//! `t₊ = t + z − ia`, `x₊ = x + iy`, `s² = r² + (a + it)²`.
//! Every component is a null vector combination, so `F·F = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg_fields::{SpaceTimePoint, RESIDUAL_GUARD};
use crate::numerics::{ensure_finite, richardson_vector, DerivativeOrder, RichardsonConfig, Vec3};

/// Energy densities below this are treated as field zeros.
pub const DEGENERATE_ENERGY: f64 = 1e-290;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RSVector {
    pub fx: Complex64,
    pub fy: Complex64,
    pub fz: Complex64,
}

impl RSVector {
    pub fn components(&self) -> [Complex64; 3] {
        [self.fx, self.fy, self.fz]
    }

    /// `F·F` (no conjugation); zero for a null field.
    pub fn self_dot(&self) -> Complex64 {
        self.fx * self.fx + self.fy * self.fy + self.fz * self.fz
    }

    /// `|F|² = F*·F`.
    pub fn norm_sqr(&self) -> f64 {
        self.fx.norm_sqr() + self.fy.norm_sqr() + self.fz.norm_sqr()
    }

    /// `|F·F| / |F|²`, 0 at field zeros.
    pub fn null_defect(&self) -> f64 {
        let n = self.norm_sqr();
        if n == 0.0 {
            0.0
        } else {
            self.self_dot().norm() / n
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EMSample {
    pub e: Vec3,
    pub b: Vec3,
    /// Poynting vector `E×B`.
    pub p: Vec3,
    /// Energy density `(E² + B²)/2`.
    pub u: f64,
    pub vm: Vec3,
}

fn check_size(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("size a must be positive, got {a}")))
    }
}

pub fn rs_vector(p: &SpaceTimePoint, a: f64, l: u32) -> Result<RSVector> {
    check_size(a)?;
    if !p.is_finite() {
        return Err(Error::Domain("non-finite space-time point".into()));
    }
    let tp = Complex64::new(p.t + p.z, -a);
    let xp = p.x_plus();
    let s2 = Complex64::new(p.r2() + a * a - p.t * p.t, 2.0 * a * p.t);
    let pre = xp.powu(l) / s2.powu(l + 3);
    let (t2, x2) = (tp * tp, xp * xp);
    let f = RSVector {
        fx: pre * (t2 - x2),
        fy: pre * Complex64::new(0.0, 1.0) * (t2 + x2),
        fz: pre * (-2.0) * tp * xp,
    };
    for c in f.components() {
        ensure_finite(c, "Riemann–Silberstein vector")?;
    }
    Ok(f)
}

/// Parity partner `conj(F(−r, t))`. It solves the same equations, and its
/// velocity field is `−v(−r, t)` of the original; this is the field whose
/// velocity is [`velocity_maxwell`].
pub fn rs_vector_mirror(p: &SpaceTimePoint, a: f64, l: u32) -> Result<RSVector> {
    let f = rs_vector(&SpaceTimePoint::new(-p.x, -p.y, -p.z, p.t), a, l)?;
    Ok(RSVector {
        fx: f.fx.conj(),
        fy: f.fy.conj(),
        fz: f.fz.conj(),
    })
}

pub fn derived_em(f: &RSVector) -> Result<EMSample> {
    let s2 = std::f64::consts::SQRT_2;
    let e = Vec3::new(f.fx.re, f.fy.re, f.fz.re) * s2;
    let b = Vec3::new(f.fx.im, f.fy.im, f.fz.im) * s2;
    let u = f.norm_sqr();
    if u < DEGENERATE_ENERGY {
        return Err(Error::Degenerate(format!("energy density {u:e} vanishes")));
    }
    let p = e.cross(&b);
    Ok(EMSample { e, b, p, u, vm: p / u })
}

/// Closed-form velocity `w / (a² + r² + t² − 2zt)` with
/// `w = (2x(t−z) − 2ay, 2y(t−z) + 2ax, r² − a² − t² + 2z(t−z))`.
/// Independent of the winding number.
pub fn velocity_maxwell(p: &SpaceTimePoint, a: f64) -> Result<Vec3> {
    check_size(a)?;
    let tz = p.t - p.z;
    let r2 = p.r2();
    let w = Vec3::new(
        2.0 * p.x * tz - 2.0 * a * p.y,
        2.0 * p.y * tz + 2.0 * a * p.x,
        r2 - a * a - p.t * p.t + 2.0 * p.z * tz,
    );
    Ok(w / (a * a + r2 + p.t * p.t - 2.0 * p.z * p.t))
}

/// Relative residuals of `i∂_t F = ∇×F` and `∇·F = 0`, each divided by the
/// sum of the magnitudes of its terms; the larger is returned.
pub fn maxwell_residual(p: &SpaceTimePoint, a: f64, l: u32) -> Result<f64> {
    check_size(a)?;
    let cfg = RichardsonConfig::default().with_step(0.1 * a);
    // d[mu][k] = ∂_mu F_k
    let mut d = [[Complex64::new(0.0, 0.0); 3]; 4];
    for (mu, row) in d.iter_mut().enumerate() {
        let der = richardson_vector(
            |x| Ok(rs_vector(&p.shifted(mu, x - p.coord(mu)), a, l)?.components().to_vec()),
            p.coord(mu),
            DerivativeOrder::First,
            &cfg,
        )?;
        for k in 0..3 {
            row[k] = der[k].value;
        }
    }
    let i = Complex64::new(0.0, 1.0);
    let curl = [(d[2][2], d[3][1]), (d[3][0], d[1][2]), (d[1][1], d[2][0])];
    let mut num = 0.0;
    let mut scale = 0.0;
    for k in 0..3 {
        let lhs = i * d[0][k];
        let (plus, minus) = curl[k];
        num += (lhs - (plus - minus)).norm_sqr();
        scale += lhs.norm() + plus.norm() + minus.norm();
    }
    let curl_res = num.sqrt() / (scale + RESIDUAL_GUARD);
    let div = d[1][0] + d[2][1] + d[3][2];
    let div_scale: f64 = d[1][0].norm() + d[2][1].norm() + d[3][2].norm();
    let div_res = div.norm() / (div_scale + RESIDUAL_GUARD);
    Ok(curl_res.max(div_res))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_values() {
        let f = rs_vector(&SpaceTimePoint::new(0.0, 0.0, 0.0, 0.0), 1.0, 0).unwrap();
        assert!((f.fx - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((f.fy - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(f.fz.norm() < 1e-15);
        let em = derived_em(&f).unwrap();
        let r2 = std::f64::consts::SQRT_2;
        assert!((em.e - Vec3::new(-r2, 0.0, 0.0)).norm() < 1e-15);
        assert!((em.b - Vec3::new(0.0, -r2, 0.0)).norm() < 1e-15);
        assert!((em.p - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-14);
        assert!((em.u - 2.0).abs() < 1e-15);
        assert!((em.vm - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn closed_form_velocity_at_origin() {
        let v = velocity_maxwell(&SpaceTimePoint::new(0.0, 0.0, 0.0, 0.0), 1.0).unwrap();
        assert!((v - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn axis_zero_for_positive_winding() {
        let f = rs_vector(&SpaceTimePoint::new(0.0, 0.0, 0.7, 0.3), 1.0, 1).unwrap();
        assert_eq!(f.norm_sqr(), 0.0);
        assert!(matches!(derived_em(&f), Err(Error::Degenerate(_))));
    }

    #[test]
    fn mirror_velocity_is_closed_form() {
        let p = SpaceTimePoint::new(0.3, -0.8, 0.4, 0.6);
        for l in 0..3 {
            let vm = derived_em(&rs_vector_mirror(&p, 1.5, l).unwrap()).unwrap().vm;
            let closed = velocity_maxwell(&p, 1.5).unwrap();
            assert!((vm - closed).norm() < 1e-12, "l={l}");
        }
    }

    #[test]
    fn residual_small() {
        let p = SpaceTimePoint::new(0.3, -0.2, 0.5, 0.4);
        for l in 0..3 {
            assert!(maxwell_residual(&p, 1.0, l).unwrap() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_size() {
        assert!(rs_vector(&SpaceTimePoint::new(0.0, 0.0, 0.0, 0.0), 0.0, 0).is_err());
        assert!(velocity_maxwell(&SpaceTimePoint::new(0.0, 0.0, 0.0, 0.0), -1.0).is_err());
    }
}
