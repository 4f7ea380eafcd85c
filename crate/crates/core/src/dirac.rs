//! Bispinor solutions of the free Dirac equation in the Weyl representation.
//!
//! Each bispinor is generated from one scalar Klein–Gordon field: the spinor
//! that carries `f` directly is fixed, and its partner follows from one of the
//! two Weyl equations. The other Weyl equation then holds because `f` obeys
//! the Klein–Gordon equation.
//!
//! | kind  | generator    | fixed spinor |
//! |-------|--------------|--------------|
//! | `Ψ₊`  | `f_l`        | `φ = (f, 0)` |
//! | `Ψ₋`  | `f_l`        | `χ = (f, 0)` |
//! | `Φ₊`  | `f_{l+1}`    | `φ = (0, g)` |
//! | `Φ₋`  | `f_{l+1}`    | `χ = (0, g)` |

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg_fields::{complex_radius, scalar_sample, PacketParams, SpaceTimePoint, RESIDUAL_GUARD};
use crate::numerics::quadrature::{integrate_3d, integrate_axisymmetric, Scheme3d};
use crate::numerics::{
    bessel_k, richardson_vector, try_integrate_1d, DerivativeOrder, Interval, QuadratureResult, RichardsonConfig,
    ToleranceConfig,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Components below this magnitude are treated as zeros by [`mz_check`].
pub const MZ_THRESHOLD: f64 = 1e-200;

/// Constant matrices of the Weyl representation.
#[derive(Debug, Clone)]
pub struct GammaAlgebra {
    /// `γ^μ`, μ = 0..3.
    pub gamma: [Matrix4<Complex64>; 4],
    /// `σ^μ = (I, σ_i)`.
    pub sigma: [Matrix2<Complex64>; 4],
    /// `σ̃^μ = (I, −σ_i)`.
    pub sigma_tilde: [Matrix2<Complex64>; 4],
    /// `γ⁵ = iγ⁰γ¹γ²γ³`.
    pub gamma5: Matrix4<Complex64>,
}

fn pauli() -> [Matrix2<Complex64>; 4] {
    [
        Matrix2::new(ONE, ZERO, ZERO, ONE),
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

fn blocks(
    upper_left: Matrix2<Complex64>,
    upper_right: Matrix2<Complex64>,
    lower_left: Matrix2<Complex64>,
    lower_right: Matrix2<Complex64>,
) -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&upper_left);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&upper_right);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&lower_left);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&lower_right);
    m
}

static GAMMA: LazyLock<GammaAlgebra> = LazyLock::new(|| {
    let s = pauli();
    let z = Matrix2::zeros();
    let gamma = [
        blocks(z, s[0], s[0], z),
        blocks(z, -s[1], s[1], z),
        blocks(z, -s[2], s[2], z),
        blocks(z, -s[3], s[3], z),
    ];
    let gamma5 = gamma[0] * gamma[1] * gamma[2] * gamma[3] * I;
    GammaAlgebra {
        gamma,
        sigma: s,
        sigma_tilde: [s[0], -s[1], -s[2], -s[3]],
        gamma5,
    }
});

pub fn gamma_algebra() -> &'static GammaAlgebra {
    &GAMMA
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BispinorKind {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BispinorKind {
    pub const ALL: [BispinorKind; 4] = [
        BispinorKind::PsiPlus,
        BispinorKind::PsiMinus,
        BispinorKind::PhiPlus,
        BispinorKind::PhiMinus,
    ];

    /// Index of the generating scalar field for winding `l`.
    pub fn l_effective(self, l: u32) -> u32 {
        match self {
            BispinorKind::PsiPlus | BispinorKind::PsiMinus => l,
            BispinorKind::PhiPlus | BispinorKind::PhiMinus => l + 1,
        }
    }

    /// `+1` when the state moves towards `+z` in momentum space, `−1` otherwise.
    pub fn helicity_sign(self) -> f64 {
        match self {
            BispinorKind::PsiMinus | BispinorKind::PhiPlus => 1.0,
            BispinorKind::PsiPlus | BispinorKind::PhiMinus => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BispinorKind::PsiPlus => "psi+",
            BispinorKind::PsiMinus => "psi-",
            BispinorKind::PhiPlus => "phi+",
            BispinorKind::PhiMinus => "phi-",
        }
    }
}

impl fmt::Display for BispinorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BispinorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psi+" | "psiplus" | "psi_plus" => Ok(BispinorKind::PsiPlus),
            "psi-" | "psiminus" | "psi_minus" => Ok(BispinorKind::PsiMinus),
            "phi+" | "phiplus" | "phi_plus" => Ok(BispinorKind::PhiPlus),
            "phi-" | "phiminus" | "phi_minus" => Ok(BispinorKind::PhiMinus),
            _ => Err(Error::InvalidParams(format!("unknown bispinor kind '{s}'"))),
        }
    }
}

/// Four complex components; `psi[0..2]` is `φ`, `psi[2..4]` is `χ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bispinor {
    pub psi: [Complex64; 4],
}

impl Bispinor {
    pub fn new(psi: [Complex64; 4]) -> Self {
        Self { psi }
    }

    pub fn upper(&self) -> [Complex64; 2] {
        [self.psi[0], self.psi[1]]
    }

    pub fn lower(&self) -> [Complex64; 2] {
        [self.psi[2], self.psi[3]]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(self, k: f64) -> Self {
        Self {
            psi: self.psi.map(|c| c * k),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.psi.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `Ψ̄ Γ Ψ` for any 4×4 matrix `Γ`.
    pub fn bilinear(&self, gamma: &Matrix4<Complex64>) -> Complex64 {
        let g0 = &gamma_algebra().gamma[0];
        let mut acc = ZERO;
        for i in 0..4 {
            for j in 0..4 {
                let m = (g0 * gamma)[(i, j)];
                acc += self.psi[i].conj() * m * self.psi[j];
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourCurrent {
    pub j0: f64,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl FourCurrent {
    pub fn spatial_norm(&self) -> f64 {
        (self.jx * self.jx + self.jy * self.jy + self.jz * self.jz).sqrt()
    }

    /// `(j⁰)² − |j|²`; non-negative for a causal current.
    pub fn interval(&self) -> f64 {
        self.j0 * self.j0 - (self.jx * self.jx + self.jy * self.jy + self.jz * self.jz)
    }

    pub fn component(&self, mu: usize) -> f64 {
        match mu {
            0 => self.j0,
            1 => self.jx,
            2 => self.jy,
            3 => self.jz,
            _ => panic!("four-current index {mu} out of range"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConstant {
    pub n: f64,
    pub l_effective: u32,
}

/// `N` from `N⁻² = 2mπ² n! K_{n+2}(2am) / (am)^{n+1}` with `n = l_effective`.
///
/// A boosted packet keeps the rest-frame scalar field but its charge picks
/// up the Doppler factor `√((1 − σv)/(1 + σv))`, σ = [`BispinorKind::helicity_sign`]
/// with the sign flipped; `N²` is divided by that factor so the charge stays 1.
pub fn normalization_constant(kind: BispinorKind, params: &PacketParams) -> Result<NormalizationConstant> {
    params.validate()?;
    let n = kind.l_effective(params.l);
    let am = params.a * params.m;
    // K_{n+2}(2am)/(am)^{n+1} underflows for large am; work in logs with the scaled K
    let k_scaled = crate::numerics::bessel_k_scaled(n as usize + 2, Complex64::new(2.0 * am, 0.0))?.re;
    let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let log_inv_n2 = (2.0 * params.m * PI * PI).ln() + log_fact + k_scaled.ln() - 2.0 * am - (n as f64 + 1.0) * am.ln();
    let mut log_n2 = -log_inv_n2;
    if params.is_boosted() {
        log_n2 -= doppler_factor(kind, params.v).ln();
    }
    let value = (0.5 * log_n2).exp();
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::Domain(format!(
            "normalization constant not representable for a m = {am}"
        )));
    }
    Ok(NormalizationConstant {
        n: value,
        l_effective: n,
    })
}

/// Ratio of boosted to rest-frame charge for the unadjusted constant.
pub fn doppler_factor(kind: BispinorKind, v: f64) -> f64 {
    let sigma = -kind.helicity_sign();
    ((1.0 - sigma * v) / (1.0 + sigma * v)).sqrt()
}

/// Un-boosted `N⁻²` straight from the formula, for oracle comparisons.
pub fn inverse_norm_square(n: u32, a: f64, m: f64) -> Result<f64> {
    let am = a * m;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let k = bessel_k(n as usize + 2, Complex64::new(2.0 * am, 0.0))?.re;
    Ok(2.0 * m * PI * PI * fact * k / am.powi(n as i32 + 1))
}

fn unnormalized(kind: BispinorKind, p: &SpaceTimePoint, params: &PacketParams) -> Result<Bispinor> {
    let n = kind.l_effective(params.l);
    let s = scalar_sample(p, params, n)?;
    let f = s.value;
    let [dt, dx, dy, dz] = s.gradient;
    let c = I / params.m;
    let psi = match kind {
        BispinorKind::PsiPlus => [f, ZERO, c * (dt + dz), c * (dx + I * dy)],
        BispinorKind::PsiMinus => [c * (dt - dz), -c * (dx + I * dy), f, ZERO],
        BispinorKind::PhiPlus => [ZERO, f, c * (dx - I * dy), c * (dt - dz)],
        BispinorKind::PhiMinus => [-c * (dx - I * dy), c * (dt + dz), ZERO, f],
    };
    Ok(Bispinor::new(psi))
}

/// The bispinor of `kind` at `p`, multiplied by `N` when `normalized`.
pub fn bispinor(kind: BispinorKind, p: &SpaceTimePoint, params: &PacketParams, normalized: bool) -> Result<Bispinor> {
    let b = unnormalized(kind, p, params)?;
    if normalized {
        Ok(b.scaled(normalization_constant(kind, params)?.n))
    } else {
        Ok(b)
    }
}

/// A bispinor-valued field on space-time.
pub trait SpinorField: Sync {
    fn eval(&self, p: &SpaceTimePoint) -> Result<Bispinor>;
    fn params(&self) -> &PacketParams;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracState {
    pub kind: BispinorKind,
    pub params: PacketParams,
    /// Normalization factor applied to every sample (1 when unnormalized).
    pub scale: f64,
}

impl DiracState {
    pub fn new(kind: BispinorKind, params: PacketParams, normalized: bool) -> Result<Self> {
        params.validate()?;
        let scale = if normalized {
            normalization_constant(kind, &params)?.n
        } else {
            1.0
        };
        Ok(Self { kind, params, scale })
    }
}

impl SpinorField for DiracState {
    fn eval(&self, p: &SpaceTimePoint) -> Result<Bispinor> {
        Ok(unnormalized(self.kind, p, &self.params)?.scaled(self.scale))
    }

    fn params(&self) -> &PacketParams {
        &self.params
    }
}

/// `Ψ'(p) = S Ψ(R⁻¹p)` for the rotation by π about the x axis,
/// `S = e^{−iπΣ_x/2} = −iΣ_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedPiX<F> {
    pub inner: F,
}

impl<F: SpinorField> SpinorField for RotatedPiX<F> {
    fn eval(&self, p: &SpaceTimePoint) -> Result<Bispinor> {
        let q = SpaceTimePoint::new(p.x, -p.y, -p.z, p.t);
        let b = self.inner.eval(&q)?;
        let [a, b2, c, d] = b.psi;
        Ok(Bispinor::new([-I * b2, -I * a, -I * d, -I * c]))
    }

    fn params(&self) -> &PacketParams {
        self.inner.params()
    }
}

pub fn rotate_pi_x<F: SpinorField>(field: F) -> RotatedPiX<F> {
    RotatedPiX { inner: field }
}

/// `j^μ = Ψ̄γ^μΨ`, written out in Weyl blocks:
/// `j⁰ = |φ|² + |χ|²`, `j = φ†σφ − χ†σχ`.
pub fn current_from_bispinor(b: &Bispinor) -> FourCurrent {
    let spin = |u: Complex64, d: Complex64| {
        let cross = u.conj() * d;
        (2.0 * cross.re, 2.0 * cross.im, u.norm_sqr() - d.norm_sqr())
    };
    let [p1, p2, c1, c2] = b.psi;
    let (ux, uy, uz) = spin(p1, p2);
    let (lx, ly, lz) = spin(c1, c2);
    FourCurrent {
        j0: b.norm_sqr(),
        jx: ux - lx,
        jy: uy - ly,
        jz: uz - lz,
    }
}

/// Four-current of a normalized state, from the bilinear.
pub fn four_current(kind: BispinorKind, p: &SpaceTimePoint, params: &PacketParams) -> Result<FourCurrent> {
    Ok(current_from_bispinor(&bispinor(kind, p, params, true)?))
}

pub fn field_current<F: SpinorField>(field: &F, p: &SpaceTimePoint) -> Result<FourCurrent> {
    Ok(current_from_bispinor(&field.eval(p)?))
}

/// Closed-form current of a normalized `Ψ±` at rest.
///
/// With `R = |x₊^l m K_{l+2}(ms)/s^{l+2}|²` standing in for the removable
/// `|f_{l+1}|²/(x²+y²)`:
/// `j⁰ = N²[|f_l|² + |f_{l+1}|² + (a² + (t∓z)²)R]`,
/// `j_x = 2N²(x(t∓z) − ay)R`, `j_y = 2N²(y(t∓z) + ax)R`,
/// `j_z = ±N²[|f_l|² + |f_{l+1}|² − (a² + (t∓z)²)R]`.
pub fn four_current_closed_form(kind: BispinorKind, p: &SpaceTimePoint, params: &PacketParams) -> Result<FourCurrent> {
    let sign = match kind {
        BispinorKind::PsiPlus => 1.0,
        BispinorKind::PsiMinus => -1.0,
        _ => {
            return Err(Error::InvalidParams(format!(
                "no closed-form current for {kind}; use the bilinear"
            )))
        }
    };
    if params.is_boosted() {
        return Err(Error::InvalidParams("closed-form current is for v = 0".into()));
    }
    let l = params.l;
    let f0 = scalar_sample(p, params, l)?.value.norm_sqr();
    let f1 = scalar_sample(p, params, l + 1)?.value.norm_sqr();
    let s = complex_radius(p, params)?.s;
    let k = bessel_k(l as usize + 2, s * params.m)?;
    let r = (p.x_plus().powu(l) * params.m * k / s.powu(l + 2)).norm_sqr();
    let tz = p.t - sign * p.z;
    let n2 = normalization_constant(kind, params)?.n.powi(2);
    let band = params.a * params.a + tz * tz;
    Ok(FourCurrent {
        j0: n2 * (f0 + f1 + band * r),
        jx: 2.0 * n2 * (p.x * tz - params.a * p.y) * r,
        jy: 2.0 * n2 * (p.y * tz + params.a * p.x) * r,
        jz: sign * n2 * (f0 + f1 - band * r),
    })
}

fn richardson_cfg(params: &PacketParams) -> RichardsonConfig {
    RichardsonConfig::default().with_step(params.derivative_step())
}

/// `∂_μ Ψ` for μ = t, x, y, z.
fn bispinor_gradient<F: SpinorField>(field: &F, p: &SpaceTimePoint) -> Result<[[Complex64; 4]; 4]> {
    let cfg = richardson_cfg(field.params());
    let mut out = [[ZERO; 4]; 4];
    for (mu, row) in out.iter_mut().enumerate() {
        let d = richardson_vector(
            |x| Ok(field.eval(&p.shifted(mu, x - p.coord(mu)))?.psi.to_vec()),
            p.coord(mu),
            DerivativeOrder::First,
            &cfg,
        )?;
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = d[k].value;
        }
    }
    Ok(out)
}

/// Residuals of `iσ^μ∂_μφ = mχ` and `iσ̃^μ∂_μχ = mφ`, each divided by the
/// sum of the magnitudes of its terms; returns the larger.
pub fn field_dirac_residual<F: SpinorField>(field: &F, p: &SpaceTimePoint) -> Result<f64> {
    let psi = field.eval(p)?;
    let grad = bispinor_gradient(field, p)?;
    let alg = gamma_algebra();
    let m = field.params().m;
    let mut worst: f64 = 0.0;
    for (offset, partner, sig) in [(0usize, 2usize, &alg.sigma), (2, 0, &alg.sigma_tilde)] {
        let mut lhs = [ZERO; 2];
        let mut scale = 0.0;
        for mu in 0..4 {
            for (r, slot) in lhs.iter_mut().enumerate() {
                for c in 0..2 {
                    let term = I * sig[mu][(r, c)] * grad[mu][offset + c];
                    *slot += term;
                    scale += term.norm();
                }
            }
        }
        let mut res = 0.0;
        for (r, l) in lhs.iter().enumerate() {
            let rhs = m * psi.psi[partner + r];
            scale += rhs.norm();
            res += (l - rhs).norm_sqr();
        }
        worst = worst.max(res.sqrt() / (scale + RESIDUAL_GUARD));
    }
    Ok(worst)
}

pub fn dirac_residual(kind: BispinorKind, p: &SpaceTimePoint, params: &PacketParams) -> Result<f64> {
    field_dirac_residual(&DiracState::new(kind, *params, false)?, p)
}

/// `|∂_μ j^μ|` divided by the sum of the magnitudes of the four terms.
pub fn field_conservation_residual<F: SpinorField>(field: &F, p: &SpaceTimePoint) -> Result<f64> {
    let cfg = richardson_cfg(field.params());
    let mut div = 0.0;
    let mut scale = 0.0;
    for mu in 0..4 {
        let d = richardson_vector(
            |x| {
                let j = field_current(field, &p.shifted(mu, x - p.coord(mu)))?;
                Ok(vec![Complex64::new(j.component(mu), 0.0)])
            },
            p.coord(mu),
            DerivativeOrder::First,
            &cfg,
        )?;
        div += d[0].value.re;
        scale += d[0].value.re.abs();
    }
    Ok(div.abs() / (scale + RESIDUAL_GUARD))
}

pub fn current_conservation_residual(kind: BispinorKind, p: &SpaceTimePoint, params: &PacketParams) -> Result<f64> {
    field_conservation_residual(&DiracState::new(kind, *params, true)?, p)
}

/// `(M_z Ψ)_k / Ψ_k` for every component above [`MZ_THRESHOLD`], with
/// `M_z = −i ∂_φ + Σ_z/2` and the azimuthal derivative taken along a rotation
/// of the sample point. `None` marks vanishing components.
pub fn field_mz_ratios<F: SpinorField>(field: &F, p: &SpaceTimePoint) -> Result<[Option<Complex64>; 4]> {
    let psi = field.eval(p)?;
    let cfg = RichardsonConfig::default().with_step(0.05);
    let d = richardson_vector(
        |phi| Ok(field.eval(&p.rotated_z(phi))?.psi.to_vec()),
        0.0,
        DerivativeOrder::First,
        &cfg,
    )?;
    let spin = [0.5, -0.5, 0.5, -0.5];
    let mut out = [None; 4];
    for k in 0..4 {
        if psi.psi[k].norm() > MZ_THRESHOLD {
            let mz = -I * d[k].value + spin[k] * psi.psi[k];
            out[k] = Some(mz / psi.psi[k]);
        }
    }
    Ok(out)
}

/// Local `M_z` eigenvalue estimate from the largest component.
pub fn field_mz_check<F: SpinorField>(field: &F, p: &SpaceTimePoint) -> Result<Complex64> {
    let psi = field.eval(p)?;
    let ratios = field_mz_ratios(field, p)?;
    let k = (0..4)
        .max_by(|&i, &j| psi.psi[i].norm().total_cmp(&psi.psi[j].norm()))
        .expect("four components");
    ratios[k].ok_or_else(|| Error::Degenerate(format!("bispinor vanishes at {p:?}")))
}

pub fn mz_check(kind: BispinorKind, p: &SpaceTimePoint, params: &PacketParams) -> Result<Complex64> {
    field_mz_check(&DiracState::new(kind, *params, false)?, p)
}

pub fn mz_ratios(kind: BispinorKind, p: &SpaceTimePoint, params: &PacketParams) -> Result<[Option<Complex64>; 4]> {
    field_mz_ratios(&DiracState::new(kind, *params, false)?, p)
}

/// `∫ j⁰ d³r` at `t = 0` for the normalized state.
pub fn norm_integral(
    kind: BispinorKind,
    params: &PacketParams,
    scheme: Scheme3d,
    tol: &ToleranceConfig,
) -> Result<QuadratureResult<f64>> {
    let state = DiracState::new(kind, *params, true)?;
    let r_max = params.radial_cutoff(0.0, tol.abs_tol, 2 * kind.l_effective(params.l) + 2);
    let density =
        |x: f64, y: f64, z: f64| -> Result<f64> { Ok(state.eval(&SpaceTimePoint::new(x, y, z, 0.0))?.norm_sqr()) };
    match scheme {
        Scheme3d::Spherical => integrate_3d(|r| density(r.x, r.y, r.z), r_max, tol),
        Scheme3d::Axisymmetric => integrate_axisymmetric(|rho, z| density(rho, 0.0, z), r_max, tol),
    }
}

/// Total charge of the rest-frame state from its momentum amplitude,
/// `(2π^{5/2} N²/m²)(n!/Γ(n+3/2)) ∫ (p/m)^{2n} p² e^{−2aE} dp`.
/// Boosted parameters are evaluated at `v = 0`.
pub fn norm_momentum_integral(kind: BispinorKind, params: &PacketParams, tol: &ToleranceConfig) -> Result<f64> {
    let rest = params.with_v(0.0);
    let nc = normalization_constant(kind, &rest)?;
    let n = nc.l_effective as i32;
    let (m, a) = (rest.m, rest.a);
    let radial = try_integrate_1d(
        |p| Ok((p / m).powi(2 * n) * p * p * (-2.0 * a * ((m * m + p * p).sqrt() - m)).exp()),
        Interval::SemiInfinite(0.0),
        tol,
    )?;
    let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let log_gamma: f64 = 0.5 * PI.ln() + (0..=n).map(|k| (k as f64 + 0.5).ln()).sum::<f64>();
    let log_pre = (2.0 * PI.powf(2.5) / (m * m)).ln() + 2.0 * nc.n.ln() + log_fact - log_gamma - 2.0 * a * m;
    Ok(radial.value * log_pre.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rest(l: u32) -> PacketParams {
        PacketParams::rest(1.0, 1.0, l).unwrap()
    }

    #[test]
    fn clifford_algebra() {
        let g = &gamma_algebra().gamma;
        let eta = [1.0, -1.0, -1.0, -1.0];
        for mu in 0..4 {
            for nu in 0..4 {
                let anti = g[mu] * g[nu] + g[nu] * g[mu];
                let want = if mu == nu { 2.0 * eta[mu] } else { 0.0 };
                let diff = anti - Matrix4::identity() * Complex64::new(want, 0.0);
                assert!(diff.norm() < 1e-15, "{mu}{nu}");
            }
        }
    }

    #[test]
    fn gamma0_is_off_diagonal_identity() {
        let g0 = gamma_algebra().gamma[0];
        assert_eq!(g0[(0, 2)], ONE);
        assert_eq!(g0[(1, 3)], ONE);
        assert_eq!(g0[(0, 0)], ZERO);
        assert_eq!(g0 * g0, Matrix4::identity());
    }

    #[test]
    fn block_current_matches_gamma_bilinear() {
        let b = bispinor(
            BispinorKind::PhiMinus,
            &SpaceTimePoint::new(0.3, -0.2, 0.5, 0.4),
            &rest(1),
            false,
        )
        .unwrap();
        let j = current_from_bispinor(&b);
        let g = &gamma_algebra().gamma;
        for (mu, gm) in g.iter().enumerate() {
            let v = b.bilinear(gm);
            assert!(v.im.abs() < 1e-14);
            assert!((v.re - j.component(mu)).abs() < 1e-14 * j.j0);
        }
    }

    #[test]
    fn vanishing_components() {
        let p = SpaceTimePoint::new(0.7, 0.2, -0.4, 0.3);
        let b = bispinor(BispinorKind::PsiPlus, &p, &rest(2), false).unwrap();
        assert_eq!(b.psi[1], ZERO);
        let b = bispinor(BispinorKind::PsiMinus, &p, &rest(2), false).unwrap();
        assert_eq!(b.psi[3], ZERO);
    }

    #[test]
    fn psi_plus_on_axis() {
        // (f_0, 0, (a − iz) m K_2(ms)/s², 0) at x = y = 0, t = 0
        let z = 0.6;
        let p = SpaceTimePoint::new(0.0, 0.0, z, 0.0);
        let b = bispinor(BispinorKind::PsiPlus, &p, &rest(0), false).unwrap();
        let s = Complex64::new(z * z + 1.0, 0.0).sqrt();
        let f0 = bessel_k(1, s).unwrap() / s;
        let third = Complex64::new(1.0, -z) * bessel_k(2, s).unwrap() / (s * s);
        assert!((b.psi[0] - f0).norm() < 1e-14);
        assert!((b.psi[2] - third).norm() < 1e-14);
        assert!(b.psi[3].norm() < 1e-300);
    }

    #[test]
    fn phi_entries_match_finite_differences() {
        let params = rest(1);
        let p = SpaceTimePoint::new(0.35, -0.15, 0.2, 0.1);
        let b = bispinor(BispinorKind::PhiPlus, &p, &params, false).unwrap();
        let cfg = RichardsonConfig::default().with_step(0.05);
        let g = |mu: usize| {
            richardson_vector(
                |x| Ok(vec![scalar_sample(&p.shifted(mu, x - p.coord(mu)), &params, 2)?.value]),
                p.coord(mu),
                DerivativeOrder::First,
                &cfg,
            )
            .unwrap()[0]
                .value
        };
        let c = I / params.m;
        let third = c * (g(1) - I * g(2));
        let fourth = c * (g(0) - g(3));
        assert!((b.psi[2] - third).norm() < 1e-8 * third.norm());
        assert!((b.psi[3] - fourth).norm() < 1e-8 * fourth.norm());
    }

    #[test]
    fn normalization_closed_form() {
        let n = normalization_constant(BispinorKind::PsiPlus, &rest(0)).unwrap();
        let want = 2.0 * PI * PI * bessel_k(2, Complex64::new(2.0, 0.0)).unwrap().re;
        assert!((n.n.powi(-2) - want).abs() < 1e-12 * want);
        assert_eq!(n.l_effective, 0);
        let phi = normalization_constant(BispinorKind::PhiMinus, &rest(0)).unwrap();
        let psi1 = normalization_constant(BispinorKind::PsiPlus, &rest(1)).unwrap();
        assert!((phi.n - psi1.n).abs() < 1e-15 * psi1.n);
        assert_eq!(phi.l_effective, 1);
    }

    #[test]
    fn normalization_large_am_is_finite() {
        let p = PacketParams::rest(1.0, 400.0, 2).unwrap();
        let n = normalization_constant(BispinorKind::PsiMinus, &p).unwrap();
        assert!(n.n.is_finite() && n.n > 0.0);
    }

    #[test]
    fn closed_form_matches_bilinear() {
        for l in 0..3 {
            for kind in [BispinorKind::PsiPlus, BispinorKind::PsiMinus] {
                let p = SpaceTimePoint::new(0.4, -0.7, 0.3, 0.9);
                let a = four_current(kind, &p, &rest(l)).unwrap();
                let b = four_current_closed_form(kind, &p, &rest(l)).unwrap();
                for mu in 0..4 {
                    assert!(
                        (a.component(mu) - b.component(mu)).abs() < 1e-12 * a.j0,
                        "{kind} {l} {mu}"
                    );
                }
            }
        }
    }

    #[test]
    fn azimuthal_circulation_in_midplane() {
        let params = rest(1);
        let p = SpaceTimePoint::new(0.5, 0.3, 0.0, 0.0);
        let j = four_current(BispinorKind::PsiPlus, &p, &params).unwrap();
        let dt = scalar_sample(&p, &params, 1).unwrap().gradient[0];
        let r = dt.norm_sqr() / (params.a * params.a);
        let n2 = normalization_constant(BispinorKind::PsiPlus, &params)
            .unwrap()
            .n
            .powi(2);
        assert!((j.jx + 2.0 * params.a * p.y * r * n2).abs() < 1e-12 * j.j0);
        assert!((j.jy - 2.0 * params.a * p.x * r * n2).abs() < 1e-12 * j.j0);
    }

    #[test]
    fn residual_at_reference_point() {
        let p = SpaceTimePoint::new(0.4, 0.1, -0.3, 0.2);
        assert!(dirac_residual(BispinorKind::PsiPlus, &p, &rest(0)).unwrap() < 1e-6);
        assert!(dirac_residual(BispinorKind::PsiMinus, &p, &rest(2)).unwrap() < 1e-6);
        let boosted = rest(0).with_v(0.5);
        assert!(dirac_residual(BispinorKind::PhiPlus, &p, &boosted).unwrap() < 1e-6);
    }

    #[test]
    fn conservation_at_reference_point() {
        let p = SpaceTimePoint::new(0.3, -0.4, 0.2, 0.5);
        assert!(current_conservation_residual(BispinorKind::PsiPlus, &p, &rest(0)).unwrap() < 1e-6);
        assert!(current_conservation_residual(BispinorKind::PhiMinus, &p, &rest(1)).unwrap() < 1e-6);
        let boosted = rest(0).with_v(0.9);
        assert!(current_conservation_residual(BispinorKind::PsiPlus, &p, &boosted).unwrap() < 1e-6);
    }

    #[test]
    fn mz_eigenvalues() {
        let p = SpaceTimePoint::new(0.5, 0.4, 0.3, 0.2);
        for kind in BispinorKind::ALL {
            for l in 0..4 {
                let mz = mz_check(kind, &p, &rest(l)).unwrap();
                assert!(
                    (mz - Complex64::new(l as f64 + 0.5, 0.0)).norm() < 1e-6,
                    "{kind} {l} {mz}"
                );
            }
        }
    }

    #[test]
    fn rotation_flips_mz_and_squares_to_minus_one() {
        let p = SpaceTimePoint::new(0.5, 0.4, 0.3, 0.2);
        let state = DiracState::new(BispinorKind::PsiPlus, rest(0), false).unwrap();
        let rotated = rotate_pi_x(state);
        let mz = field_mz_check(&rotated, &p).unwrap();
        assert!((mz + 0.5).norm() < 1e-6, "{mz}");
        let twice = rotate_pi_x(rotated).eval(&p).unwrap();
        let orig = state.eval(&p).unwrap();
        for k in 0..4 {
            assert!((twice.psi[k] + orig.psi[k]).norm() < 1e-15);
        }
        assert!(field_dirac_residual(&rotated, &p).unwrap() < 1e-6);
    }

    #[test]
    fn kind_round_trips_through_text() {
        for kind in BispinorKind::ALL {
            assert_eq!(kind.name().parse::<BispinorKind>().unwrap(), kind);
        }
        assert!("chi+".parse::<BispinorKind>().is_err());
    }
}
