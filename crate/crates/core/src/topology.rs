//! Velocity fields, the Hopf map, field-line tracing, closure and linking.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirac::{four_current, BispinorKind};
use crate::error::{Error, Result};
use crate::kg_fields::{complex_radius, PacketParams, SpaceTimePoint};
use crate::maxwell::velocity_maxwell;
use crate::numerics::{bessel_k_seq, ode_trace, OdeConfig, StopRule, StreamlineTrace, Vec3};

/// A trace counts as closed when its closure metric is below this.
pub const CLOSURE_THRESHOLD: f64 = 1e-3;

/// `Q_l = |s K_{l+1}(ms) / K_{l+2}(ms)|²`.
pub fn q_factor(p: &SpaceTimePoint, params: &PacketParams) -> Result<f64> {
    let s = complex_radius(p, params)?.s;
    let k = bessel_k_seq(params.l as usize + 2, s * params.m)?;
    let l = params.l as usize;
    Ok((s * k[l + 1] / k[l + 2]).norm_sqr())
}

/// Velocity `j/j⁰` of `Ψ₊` in closed form,
/// `(w + Q_l n) / (a² + r² + t² − 2tz + Q_l)`.
pub fn velocity_dirac(p: &SpaceTimePoint, params: &PacketParams) -> Result<Vec3> {
    if params.is_boosted() {
        return Err(Error::InvalidParams(
            "closed-form Dirac velocity is for v = 0; use velocity_from_current".into(),
        ));
    }
    let q = q_factor(p, params)?;
    let a = params.a;
    let tz = p.t - p.z;
    let r2 = p.r2();
    let w = Vec3::new(
        2.0 * p.x * tz - 2.0 * a * p.y,
        2.0 * p.y * tz + 2.0 * a * p.x,
        r2 - a * a - p.t * p.t + 2.0 * p.z * tz,
    );
    Ok((w + Vec3::new(0.0, 0.0, q)) / (a * a + r2 + p.t * p.t - 2.0 * p.z * p.t + q))
}

/// `j/j⁰` from the bilinear current of any kind, boosted or not.
pub fn velocity_from_current(kind: BispinorKind, p: &SpaceTimePoint, params: &PacketParams) -> Result<Vec3> {
    let j = four_current(kind, p, params)?;
    if j.j0 <= 0.0 {
        return Err(Error::Degenerate(format!("zero density at {p:?}")));
    }
    Ok(Vec3::new(j.jx, j.jy, j.jz) / j.j0)
}

/// Value of `Υ = (v_x + iv_y)/(1 − v_z)`; `v_z = 1` maps to the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HopfValue {
    Finite(Complex64),
    Infinity,
}

impl HopfValue {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            HopfValue::Finite(z) => Some(z),
            HopfValue::Infinity => None,
        }
    }
}

pub fn hopf_map(v: &Vec3) -> HopfValue {
    let den = 1.0 - v.z;
    if den == 0.0 {
        HopfValue::Infinity
    } else {
        HopfValue::Finite(Complex64::new(v.x, v.y) / den)
    }
}

/// The closed form `(x + iy)/(t − z − ia)`.
pub fn hopf_closed_form(p: &SpaceTimePoint, a: f64) -> HopfValue {
    let den = Complex64::new(p.t - p.z, -a);
    HopfValue::Finite(p.x_plus() / den)
}

/// Straight level line of `Υ` at time `t`, parameterized by `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelLine {
    pub upsilon: Complex64,
    pub t: f64,
    pub a: f64,
    pub z_range: (f64, f64),
}

impl LevelLine {
    pub fn point(&self, z: f64) -> Vec3 {
        let tz = self.t - z;
        let (re, im) = (self.upsilon.re, self.upsilon.im);
        Vec3::new(tz * re + self.a * im, tz * im - self.a * re, z)
    }

    /// `n` evenly spaced points over the z range.
    pub fn sample(&self, n: usize) -> Vec<Vec3> {
        let (lo, hi) = self.z_range;
        if n < 2 {
            return vec![self.point(lo)];
        }
        (0..n)
            .map(|i| self.point(lo + (hi - lo) * i as f64 / (n - 1) as f64))
            .collect()
    }
}

pub fn hopf_level_line(upsilon: Complex64, t: f64, a: f64, z_range: (f64, f64)) -> Result<LevelLine> {
    if !(upsilon.re.is_finite() && upsilon.im.is_finite()) {
        return Err(Error::Domain("level line needs a finite Υ".into()));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParams(format!("size a must be positive, got {a}")));
    }
    Ok(LevelLine { upsilon, t, a, z_range })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceSource {
    /// Lines of the current `j₊` of the normalized `Ψ₊`.
    CurrentJPlus,
    VelocityDirac,
    VelocityMaxwell,
}

impl std::str::FromStr for TraceSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "current" | "j+" | "current_j_plus" => Ok(TraceSource::CurrentJPlus),
            "dirac" | "vd" | "velocity_dirac" => Ok(TraceSource::VelocityDirac),
            "maxwell" | "vm" | "velocity_maxwell" => Ok(TraceSource::VelocityMaxwell),
            _ => Err(Error::InvalidParams(format!("unknown trace source '{s}'"))),
        }
    }
}

/// Field value of `source` at `r` and time `t`.
pub fn source_field(source: TraceSource, r: Vec3, t: f64, params: &PacketParams) -> Result<Vec3> {
    let p = SpaceTimePoint::at(r, t);
    match source {
        TraceSource::CurrentJPlus => {
            let j = four_current(BispinorKind::PsiPlus, &p, params)?;
            Ok(Vec3::new(j.jx, j.jy, j.jz))
        }
        TraceSource::VelocityDirac => {
            if params.is_boosted() {
                velocity_from_current(BispinorKind::PsiPlus, &p, params)
            } else {
                velocity_dirac(&p, params)
            }
        }
        TraceSource::VelocityMaxwell => velocity_maxwell(&p, params.a),
    }
}

/// Trace a line of `source` from `seed` at fixed time `t`.
///
/// The current is traced along its unit tangent; the line is the same but
/// the steps no longer depend on the tiny magnitude of `j`. Its `lambdas`
/// are then rebuilt as `∫ ds/|j|`, the parameter of `dr/dλ = j`.
pub fn trace_line(
    source: TraceSource,
    seed: Vec3,
    t: f64,
    params: &PacketParams,
    stop: StopRule,
    cfg: &OdeConfig,
) -> Result<StreamlineTrace> {
    params.validate()?;
    match source {
        TraceSource::CurrentJPlus => {
            let unit = |r: Vec3| -> Result<Vec3> {
                let j = source_field(source, r, t, params)?;
                let n = j.norm();
                if n == 0.0 {
                    return Err(Error::Degenerate(format!("current vanishes at {r:?}")));
                }
                Ok(j / n)
            };
            let mut trace = ode_trace(unit, seed, cfg, stop)?;
            let speeds: Vec<f64> = trace
                .points
                .iter()
                .map(|r| source_field(source, *r, t, params).map(|j| j.norm()))
                .collect::<Result<_>>()?;
            let mut lambda = 0.0;
            for i in 1..trace.len() {
                let ds = trace.arc[i] - trace.arc[i - 1];
                lambda += 0.5 * ds * (1.0 / speeds[i] + 1.0 / speeds[i - 1]);
                trace.lambdas[i] = lambda;
            }
            Ok(trace)
        }
        _ => ode_trace(|r| source_field(source, r, t, params), seed, cfg, stop),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Closure {
    /// Return distance divided by the trace diameter.
    pub metric: f64,
    pub distance: f64,
    pub diameter: f64,
    /// Index of the segment `[index, index + 1]` holding the closest return.
    pub index: usize,
}

fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Closest return to the seed: after the trace first leaves the ball of
/// radius `departure` (default a tenth of the diameter), the first local
/// minimum of the seed distance below half the farthest excursion so far,
/// refined to point-to-segment distance. Without such a minimum the
/// smallest distance after departure is used.
pub fn closure_analysis(trace: &StreamlineTrace, departure: Option<f64>) -> Result<Closure> {
    let pts = &trace.points;
    let diameter = trace.diameter();
    let delta = departure.unwrap_or(0.1 * diameter);
    let seed = trace.seed;
    let dist: Vec<f64> = pts.iter().map(|p| (p - seed).norm()).collect();
    let start = dist
        .iter()
        .position(|&d| d > delta)
        .ok_or(Error::NeverDeparted(delta))?;
    let mut far: f64 = 0.0;
    let mut pick = None;
    for i in start..dist.len() {
        far = far.max(dist[i]);
        let is_min = i + 1 < dist.len() && dist[i] <= dist[i - 1] && dist[i] < dist[i + 1];
        if is_min && dist[i] < 0.5 * far {
            pick = Some(i);
            break;
        }
    }
    let i = match pick {
        Some(i) => i,
        None => (start..dist.len())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
            .expect("non-empty range"),
    };
    // the true minimum lies on one of the two segments around vertex i
    let mut best = (dist[i], i.min(pts.len() - 2));
    for k in [i.saturating_sub(1), i] {
        if k + 1 < pts.len() && k >= start.saturating_sub(1) {
            let d = point_segment_distance(&seed, &pts[k], &pts[k + 1]);
            if d < best.0 {
                best = (d, k);
            }
        }
    }
    Ok(Closure {
        metric: if diameter > 0.0 {
            best.0 / diameter
        } else {
            f64::INFINITY
        },
        distance: best.0,
        diameter,
        index: best.1,
    })
}

pub fn closure_metric(trace: &StreamlineTrace) -> Result<f64> {
    Ok(closure_analysis(trace, None)?.metric)
}

/// The trace cut at its closest return, as a closed loop (the last vertex
/// joins the first).
pub fn closed_loop(trace: &StreamlineTrace, threshold: f64) -> Result<Vec<Vec3>> {
    let c = closure_analysis(trace, None)?;
    if c.metric > threshold {
        return Err(Error::Degenerate(format!(
            "trace is not closed: closure metric {:.3e} exceeds {threshold:.1e}",
            c.metric
        )));
    }
    Ok(trace.points[..=c.index].to_vec())
}

/// Gauss integral contribution of segment `a→b` against `c→d`, evaluated
/// exactly as a signed solid angle.
fn segment_pair(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    let r13 = c - a;
    let r14 = d - a;
    let r23 = c - b;
    let r24 = d - b;
    let faces = [r13.cross(&r14), r14.cross(&r24), r24.cross(&r23), r23.cross(&r13)];
    let mut n = [Vec3::zeros(); 4];
    for (k, f) in faces.iter().enumerate() {
        let len = f.norm();
        if len == 0.0 {
            return 0.0;
        }
        n[k] = f / len;
    }
    let omega: f64 = (0..4).map(|k| n[k].dot(&n[(k + 1) % 4]).clamp(-1.0, 1.0).asin()).sum();
    let orient = (d - c).cross(&(b - a)).dot(&r13);
    omega * orient.signum() / (4.0 * PI)
}

/// Linking number of two closed polygons by the Gauss double integral.
///
/// Refuses when the curves come closer than the longest segment, where the
/// polygonal approximation can no longer separate them.
pub fn linking_polylines(c1: &[Vec3], c2: &[Vec3]) -> Result<f64> {
    if c1.len() < 3 || c2.len() < 3 {
        return Err(Error::Degenerate("a closed curve needs at least three vertices".into()));
    }
    let segs = |c: &[Vec3]| -> Vec<(Vec3, Vec3)> { (0..c.len()).map(|i| (c[i], c[(i + 1) % c.len()])).collect() };
    let s1 = segs(c1);
    let s2 = segs(c2);
    let resolution = s1.iter().chain(&s2).map(|(a, b)| (b - a).norm()).fold(0.0, f64::max);
    let (sum, closest) = s1
        .par_iter()
        .map(|(a, b)| {
            let mut acc = 0.0;
            let mut near = f64::INFINITY;
            for (c, d) in &s2 {
                near = near.min((a - c).norm());
                acc += segment_pair(a, b, c, d);
            }
            (acc, near)
        })
        .reduce(|| (0.0, f64::INFINITY), |x, y| (x.0 + y.0, x.1.min(y.1)));
    if closest < resolution {
        return Err(Error::TracesTooClose(closest));
    }
    Ok(sum)
}

/// Linking number of two traces, each cut at its closest return first.
pub fn linking_number(t1: &StreamlineTrace, t2: &StreamlineTrace) -> Result<f64> {
    let c1 = closed_loop(t1, CLOSURE_THRESHOLD)?;
    let c2 = closed_loop(t2, CLOSURE_THRESHOLD)?;
    linking_polylines(&c1, &c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ode::Termination;

    fn circle(center: Vec3, u: Vec3, v: Vec3, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n as f64;
                center + u * th.cos() + v * th.sin()
            })
            .collect()
    }

    fn as_trace(points: Vec<Vec3>) -> StreamlineTrace {
        let mut arc = vec![0.0];
        for w in points.windows(2) {
            arc.push(arc.last().unwrap() + (w[1] - w[0]).norm());
        }
        StreamlineTrace {
            seed: points[0],
            lambdas: arc.clone(),
            arc,
            points,
            closed_hint: false,
            termination: Termination::Completed,
        }
    }

    #[test]
    fn hopf_map_special_values() {
        assert_eq!(
            hopf_map(&Vec3::new(0.0, 0.0, -1.0)),
            HopfValue::Finite(Complex64::new(0.0, 0.0))
        );
        assert_eq!(hopf_map(&Vec3::new(0.0, 0.0, 1.0)), HopfValue::Infinity);
    }

    #[test]
    fn level_line_examples() {
        let axis = hopf_level_line(Complex64::new(0.0, 0.0), 0.0, 1.0, (-1.0, 1.0)).unwrap();
        assert!(axis.sample(5).iter().all(|p| p.x == 0.0 && p.y == 0.0));
        let line = hopf_level_line(Complex64::new(0.0, 1.0), 0.0, 1.0, (-1.0, 1.0)).unwrap();
        let p = line.point(0.4);
        assert!((p - Vec3::new(1.0, -0.4, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn hopf_link_of_circles() {
        let a = circle(Vec3::zeros(), Vec3::x(), Vec3::y(), 400);
        let b = circle(Vec3::x(), Vec3::x(), Vec3::z(), 400);
        let lk = linking_polylines(&a, &b).unwrap();
        assert!((lk.abs() - 1.0).abs() < 0.02, "{lk}");
    }

    #[test]
    fn separated_circles_unlinked() {
        let a = circle(Vec3::zeros(), Vec3::x(), Vec3::y(), 200);
        let b = circle(Vec3::new(5.0, 0.0, 0.0), Vec3::x(), Vec3::y(), 200);
        assert!(linking_polylines(&a, &b).unwrap().abs() < 1e-12);
    }

    #[test]
    fn touching_curves_refused() {
        let a = circle(Vec3::zeros(), Vec3::x(), Vec3::y(), 100);
        let b = circle(Vec3::new(2.0, 0.0, 0.0), Vec3::x(), Vec3::z(), 100);
        assert!(matches!(linking_polylines(&a, &b), Err(Error::TracesTooClose(_))));
    }

    #[test]
    fn closure_of_circle_and_helix() {
        let mut pts = circle(Vec3::x(), -Vec3::x(), Vec3::y(), 2000);
        pts.push(pts[0]);
        let c = closure_metric(&as_trace(pts)).unwrap();
        assert!(c < 1e-12, "{c}");

        let helix: Vec<Vec3> = (0..=2400)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / 2000.0;
                Vec3::new(th.cos(), th.sin(), 0.1 * th / (2.0 * PI))
            })
            .collect();
        let t = as_trace(helix);
        let c = closure_analysis(&t, None).unwrap();
        assert!((c.distance - 0.1).abs() < 1e-4, "{}", c.distance);
    }

    #[test]
    fn never_departing_is_an_error() {
        let t = as_trace(vec![Vec3::zeros(), Vec3::new(1e-3, 0.0, 0.0)]);
        assert!(matches!(closure_analysis(&t, Some(1.0)), Err(Error::NeverDeparted(_))));
    }

    #[test]
    fn dirac_velocity_matches_current() {
        let params = PacketParams::rest(1.0, 1.0, 1).unwrap();
        let p = SpaceTimePoint::new(0.3, -0.5, 0.2, 0.4);
        let a = velocity_dirac(&p, &params).unwrap();
        let b = velocity_from_current(BispinorKind::PsiPlus, &p, &params).unwrap();
        assert!((a - b).norm() < 1e-12);
    }
}
