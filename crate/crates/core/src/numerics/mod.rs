//! Numerical kernel shared by every field module: Macdonald functions of
//! complex argument, adaptive quadrature, streamline integration, and
//! Richardson-extrapolated differentiation.

pub mod bessel;
pub mod ode;
pub mod quadrature;
pub mod richardson;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

pub type Vec3 = nalgebra::Vector3<f64>;

pub use bessel::{bessel_k, bessel_k_scaled, bessel_k_seq};
pub use ode::{ode_trace, OdeConfig, StopRule, StreamlineTrace, Termination};
pub use quadrature::{
    integrate_1d, integrate_3d, integrate_axisymmetric, try_integrate_1d, Interval, QuadValue, QuadratureResult,
    Scheme3d,
};
pub use richardson::{richardson_derivative, richardson_vector, Derivative, DerivativeOrder, RichardsonConfig};

/// Tolerances for adaptive algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl ToleranceConfig {
    pub const MAX_EVALS_LIMIT: usize = 50_000_000;

    pub fn new(rel_tol: f64, abs_tol: f64, max_evals: usize) -> Result<Self> {
        let cfg = Self {
            rel_tol,
            abs_tol,
            max_evals,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !in_unit(self.rel_tol) || !in_unit(self.abs_tol) {
            return Err(Error::InvalidParams(format!(
                "tolerances must lie in (0, 1): rel_tol = {:e}, abs_tol = {:e}",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_evals == 0 || self.max_evals > Self::MAX_EVALS_LIMIT {
            return Err(Error::InvalidParams(format!(
                "max_evals must lie in [1, {}], got {}",
                Self::MAX_EVALS_LIMIT,
                self.max_evals
            )));
        }
        Ok(())
    }

    /// Defaults for special-function work and 1D oracles.
    pub fn special_functions() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_evals: 200_000,
        }
    }

    /// Defaults for 3D (spherical product) quadrature.
    pub fn quadrature_3d() -> Self {
        Self {
            rel_tol: 1e-7,
            abs_tol: 1e-12,
            max_evals: 20_000_000,
        }
    }

    pub fn with_rel(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self::special_functions()
    }
}

pub(crate) fn ensure_finite(z: Complex64, what: &str) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Domain(format!("{what} produced a non-finite value")))
    }
}

/// Relative distance between two complex numbers, with a floor on the scale.
pub fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}
