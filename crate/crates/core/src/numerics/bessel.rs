//! Macdonald functions K_n(z) of non-negative integer order for complex
//! argument in the open right half-plane.
//!
//! K_0 and K_1 come from the ascending series for |z| < 2 and from Steed's
//! evaluation of Temme's continued fraction for |z| >= 2. Inside a narrow
//! band around the seam both are evaluated and must agree. Higher orders
//! use the upward recurrence K_{n+1} = K_{n-1} + (2n/z) K_n, which is
//! stable because K grows with order.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Series below this modulus, continued fraction at or above.
pub const SERIES_CROSSOVER: f64 = 2.0;

/// Both methods run for `|z|` inside this band and are compared.
pub const CROSSCHECK_BAND: (f64, f64) = (1.9, 2.1);

/// Allowed relative disagreement between methods inside the band.
pub const CROSSCHECK_TOL: f64 = 1e-11;

const SERIES_MAX_TERMS: usize = 80;
const CF_MAX_ITER: usize = 20_000;

/// `K_nu(z)` for integer `nu >= 0` and `Re z > 0`.
pub fn bessel_k(nu: usize, z: Complex64) -> Result<Complex64> {
    let seq = bessel_k_seq(nu, z)?;
    Ok(seq[nu])
}

/// `e^z K_nu(z)`, free of overflow and underflow for large `|z|`.
pub fn bessel_k_scaled(nu: usize, z: Complex64) -> Result<Complex64> {
    let seq = bessel_k_scaled_seq(nu, z)?;
    Ok(seq[nu])
}

/// `[K_0(z), K_1(z), ..., K_nmax(z)]`.
pub fn bessel_k_seq(nmax: usize, z: Complex64) -> Result<Vec<Complex64>> {
    let mut seq = bessel_k_scaled_seq(nmax, z)?;
    let factor = (-z).exp();
    for k in seq.iter_mut() {
        *k *= factor;
    }
    check_finite(&seq)?;
    Ok(seq)
}

/// `[e^z K_0(z), ..., e^z K_nmax(z)]`.
pub fn bessel_k_scaled_seq(nmax: usize, z: Complex64) -> Result<Vec<Complex64>> {
    let (k0, k1) = scaled_k0_k1(z)?;
    let mut seq = Vec::with_capacity(nmax + 1);
    seq.push(k0);
    if nmax >= 1 {
        seq.push(k1);
    }
    let inv_z = z.inv();
    for n in 1..nmax {
        let next = seq[n - 1] + inv_z * (2.0 * n as f64) * seq[n];
        seq.push(next);
    }
    check_finite(&seq)?;
    Ok(seq)
}

fn check_finite(seq: &[Complex64]) -> Result<()> {
    if seq.iter().all(|k| k.re.is_finite() && k.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain(
            "Macdonald function overflowed; argument too close to the origin for this order".into(),
        ))
    }
}

/// Scaled `(e^z K_0, e^z K_1)`, choosing the method by region.
pub fn scaled_k0_k1(z: Complex64) -> Result<(Complex64, Complex64)> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if z.re <= 0.0 {
        return Err(Error::Domain(format!("Macdonald function needs Re z > 0, got z = {z}")));
    }
    let modulus = z.norm();
    let (lo, hi) = CROSSCHECK_BAND;
    if modulus > lo && modulus < hi {
        let series = series_k0_k1(z)?;
        let series = (series.0 * z.exp(), series.1 * z.exp());
        let cf = continued_fraction_k0_k1(z)?;
        let d0 = crate::numerics::rel_diff(series.0, cf.0);
        let d1 = crate::numerics::rel_diff(series.1, cf.1);
        if d0 > CROSSCHECK_TOL || d1 > CROSSCHECK_TOL {
            return Err(Error::Accuracy(format!(
                "series and continued fraction disagree at z = {z}: {d0:e}, {d1:e}"
            )));
        }
        return Ok(if modulus < SERIES_CROSSOVER { series } else { cf });
    }
    if modulus < SERIES_CROSSOVER {
        let (k0, k1) = series_k0_k1(z)?;
        let e = z.exp();
        Ok((k0 * e, k1 * e))
    } else {
        continued_fraction_k0_k1(z)
    }
}

/// Unscaled `(K_0, K_1)` from the ascending series.
pub fn series_k0_k1(z: Complex64) -> Result<(Complex64, Complex64)> {
    let half = z * 0.5;
    let ln_half = half.ln();
    let t = half * half;

    // k = 0 terms
    let mut psi = -EULER_GAMMA; // psi(k + 1)
    let mut term0 = Complex64::new(1.0, 0.0); // t^k / (k!)^2
    let mut term1 = Complex64::new(1.0, 0.0); // t^k / (k! (k+1)!)
    let mut i0 = term0;
    let mut s0 = term0 * psi;
    let mut i1_sum = term1;
    let mut s1 = term1 * (psi + (psi + 1.0));

    let mut converged = false;
    for k in 1..SERIES_MAX_TERMS {
        let kf = k as f64;
        psi += 1.0 / kf;
        term0 *= t / (kf * kf);
        term1 *= t / (kf * (kf + 1.0));
        let psi_next = psi + 1.0 / (kf + 1.0);
        i0 += term0;
        s0 += term0 * psi;
        i1_sum += term1;
        s1 += term1 * (psi + psi_next);
        let tiny = f64::EPSILON * 0.25;
        if term0.norm() * (1.0 + psi.abs()) <= tiny * s0.norm().max(i0.norm())
            && term1.norm() * (1.0 + 2.0 * psi_next.abs()) <= tiny * s1.norm().max(i1_sum.norm())
        {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            evaluations: SERIES_MAX_TERMS,
            error_estimate: term0.norm(),
        });
    }
    let k0 = -ln_half * i0 + s0;
    let i1 = half * i1_sum;
    let k1 = z.inv() + ln_half * i1 - z * 0.25 * s1;
    Ok((k0, k1))
}

/// Scaled `(e^z K_0, e^z K_1)` from Steed's algorithm for Temme's CF2.
pub fn continued_fraction_k0_k1(z: Complex64) -> Result<(Complex64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    let a1 = 0.25;
    let mut b = (one + z) * 2.0;
    let mut d = b.inv();
    let mut delh = d;
    let mut h = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = a1;
    let mut a = -a1;
    let mut s = one + q * delh;

    let mut converged = false;
    let mut last = f64::INFINITY;
    for i in 2..CF_MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += qnew * c;
        b += 2.0;
        d = (b + d * a).inv();
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        last = (dels / s).norm();
        if last < f64::EPSILON * 0.5 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            evaluations: CF_MAX_ITER,
            error_estimate: last,
        });
    }
    h *= a1;
    let k0 = (Complex64::new(PI, 0.0) / (z * 2.0)).sqrt() / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    Ok((k0, k1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Reference values from mpmath besselk at 30 digits.
    #[test]
    fn real_axis_reference_values() {
        let cases = [
            (0, 1.0, 0.421_024_438_240_708_3),
            (1, 1.0, 0.601_907_230_197_234_6),
            (2, 2.0, 0.253_759_754_566_055_8),
            (0, 0.1, 2.427_069_024_702_017),
            (1, 5.0, 0.004_044_613_445_452_164),
        ];
        for (nu, x, expected) in cases {
            let got = bessel_k(nu, c(x, 0.0)).unwrap();
            assert!(((got.re - expected) / expected).abs() < 1e-13, "K_{nu}({x}) = {got}");
            assert!(got.im.abs() < 1e-15 * expected);
        }
    }

    #[test]
    fn schwarz_reflection() {
        let z = c(3.0, 2.0);
        let k = bessel_k(0, z).unwrap();
        let kc = bessel_k(0, z.conj()).unwrap();
        assert!((k.conj() - kc).norm() < 1e-15 * k.norm());
    }

    #[test]
    fn recurrence_identity_order_two() {
        let z = c(0.7, -1.3);
        let seq = bessel_k_seq(2, z).unwrap();
        let rhs = seq[0] + seq[1] * 2.0 / z;
        assert!(crate::numerics::rel_diff(seq[2], rhs) < 1e-14);
    }

    #[test]
    fn methods_agree_across_band() {
        for k in 0..24 {
            let arg = -1.45 + 2.9 * k as f64 / 23.0;
            for r in [1.5, 1.9, 2.0, 2.5, 3.0] {
                let z = Complex64::from_polar(r, arg);
                let (s0, s1) = series_k0_k1(z).unwrap();
                let (c0, c1) = continued_fraction_k0_k1(z).unwrap();
                let e = z.exp();
                assert!(crate::numerics::rel_diff(s0 * e, c0) < 1e-12, "K0 at {z}");
                assert!(crate::numerics::rel_diff(s1 * e, c1) < 1e-12, "K1 at {z}");
            }
        }
    }

    #[test]
    fn rejects_left_half_plane() {
        assert!(matches!(bessel_k(0, c(-1.0, 0.5)), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(1, c(0.0, 2.0)), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(1, c(f64::NAN, 2.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn small_argument_behaviour() {
        // K_1(z) ~ 1/z as z -> 0
        let z = c(1e-5, 2e-5);
        let k1 = bessel_k(1, z).unwrap();
        assert!(crate::numerics::rel_diff(k1 * z, c(1.0, 0.0)) < 1e-8);
    }

    #[test]
    fn scaled_matches_unscaled() {
        let z = c(12.0, 7.0);
        let k = bessel_k(3, z).unwrap();
        let ks = bessel_k_scaled(3, z).unwrap();
        assert!(crate::numerics::rel_diff(k, ks * (-z).exp()) < 1e-14);
    }
}
