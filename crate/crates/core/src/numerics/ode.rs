//! Streamline integration `dr/dλ = field(r)` with the Dormand–Prince 5(4)
//! embedded pair and per-step local error control.

use serde::Serialize;

use super::Vec3;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: 1e-3,
            max_step: 0.01,
            min_step: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

/// When to stop a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Integrate until the parameter reaches this value.
    Lambda(f64),
    /// Integrate until the polyline length reaches this value.
    ArcLength(f64),
    /// Stop just past the first close approach to the seed after having
    /// moved farther than `departure` from it; give up at `max_arc`.
    FirstReturn { departure: f64, max_arc: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Termination {
    Completed,
    Returned,
    StepUnderflow,
    MaxSteps,
    FieldError(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamlineTrace {
    pub seed: Vec3,
    pub points: Vec<Vec3>,
    /// Integration parameter at each point, strictly increasing.
    pub lambdas: Vec<f64>,
    /// Cumulative polyline length at each point.
    pub arc: Vec<f64>,
    pub closed_hint: bool,
    pub termination: Termination,
}

impl StreamlineTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when integration stopped early for numerical reasons.
    pub fn is_partial(&self) -> bool {
        matches!(
            self.termination,
            Termination::StepUnderflow | Termination::MaxSteps | Termination::FieldError(_)
        )
    }

    pub fn total_arc(&self) -> f64 {
        self.arc.last().copied().unwrap_or(0.0)
    }

    /// Largest distance between any two points, by an O(n) two-pass bound
    /// refined on the farthest candidate pair.
    pub fn diameter(&self) -> f64 {
        let pts = &self.points;
        if pts.len() < 2 {
            return 0.0;
        }
        let far_from = |p: &Vec3| {
            pts.iter()
                .enumerate()
                .map(|(i, q)| (i, (q - p).norm()))
                .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
        };
        // a few sweeps of the double-normal heuristic, then exhaustive on a stride
        let (i1, _) = far_from(&pts[0]);
        let (i2, d12) = far_from(&pts[i1]);
        let (_, d23) = far_from(&pts[i2]);
        let stride = (pts.len() / 400).max(1);
        let mut best = d12.max(d23);
        for p in pts.iter().step_by(stride) {
            best = best.max(far_from(p).1);
        }
        best
    }
}

// Autonomous system: the stage times c_i never enter.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Step {
    y: Vec3,
    k_end: Vec3,
    err: f64,
}

fn dopri_step<F>(field: &F, y: Vec3, k1: Vec3, h: f64, cfg: &OdeConfig) -> Result<Step>
where
    F: Fn(Vec3) -> Result<Vec3>,
{
    let k2 = field(y + h * (A21 * k1))?;
    let k3 = field(y + h * (A31 * k1 + A32 * k2))?;
    let k4 = field(y + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
    let k5 = field(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
    let k6 = field(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))?;
    let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    let k7 = field(y_new)?;
    let err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    let mut err: f64 = 0.0;
    for i in 0..3 {
        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
        err = err.max(err_vec[i].abs() / sc);
    }
    Ok(Step {
        y: y_new,
        k_end: k7,
        err,
    })
}

/// Trace a streamline of `field` starting at `seed`.
///
/// A field error or step-size underflow ends the trace early; the points
/// gathered so far are returned with [`StreamlineTrace::termination`] set.
/// Only a trace that could not take a single step is an error.
pub fn ode_trace<F>(field: F, seed: Vec3, cfg: &OdeConfig, stop: StopRule) -> Result<StreamlineTrace>
where
    F: Fn(Vec3) -> Result<Vec3>,
{
    let mut trace = StreamlineTrace {
        seed,
        points: vec![seed],
        lambdas: vec![0.0],
        arc: vec![0.0],
        closed_hint: false,
        termination: Termination::Completed,
    };
    let mut k1 = field(seed)?;
    let mut y = seed;
    let mut lambda = 0.0;
    let mut arc = 0.0;
    let mut h = cfg.initial_step.min(cfg.max_step);
    let mut departed = false;
    let mut max_dist: f64 = 0.0;
    let mut prev_dist = 0.0;

    for _ in 0..cfg.max_steps {
        if let StopRule::Lambda(end) = stop {
            if lambda >= end {
                return finish(trace);
            }
            h = h.min(end - lambda);
        }
        let step = match dopri_step(&field, y, k1, h, cfg) {
            Ok(s) => s,
            Err(e) => {
                trace.termination = Termination::FieldError(e.to_string());
                return finish(trace);
            }
        };
        if !step.err.is_finite() {
            trace.termination = Termination::FieldError("non-finite error estimate".into());
            return finish(trace);
        }
        if step.err > 1.0 {
            h *= (0.9 * step.err.powf(-0.2)).max(0.2);
            if h < cfg.min_step {
                trace.termination = Termination::StepUnderflow;
                return finish(trace);
            }
            continue;
        }
        lambda += h;
        arc += (step.y - y).norm();
        y = step.y;
        k1 = step.k_end;
        trace.points.push(y);
        trace.lambdas.push(lambda);
        trace.arc.push(arc);

        let growth = if step.err == 0.0 {
            5.0
        } else {
            (0.9 * step.err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * growth).min(cfg.max_step);

        match stop {
            StopRule::Lambda(_) => {}
            StopRule::ArcLength(limit) => {
                if arc >= limit {
                    return finish(trace);
                }
            }
            StopRule::FirstReturn { departure, max_arc } => {
                let d = (y - seed).norm();
                max_dist = max_dist.max(d);
                if d > departure {
                    departed = true;
                }
                if departed && d < 0.5 * max_dist && d > prev_dist {
                    trace.closed_hint = true;
                    trace.termination = Termination::Returned;
                    return finish(trace);
                }
                prev_dist = d;
                if arc >= max_arc {
                    return finish(trace);
                }
            }
        }
    }
    trace.termination = Termination::MaxSteps;
    finish(trace)
}

fn finish(trace: StreamlineTrace) -> Result<StreamlineTrace> {
    if trace.points.len() < 2 {
        let lambda = trace.lambdas.last().copied().unwrap_or(0.0);
        return Err(match trace.termination {
            Termination::FieldError(msg) => Error::Degenerate(msg),
            _ => Error::StepUnderflow { lambda, points: 1 },
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_field_reaches_endpoint() {
        let t = ode_trace(
            |_| Ok(Vec3::new(0.0, 0.0, 1.0)),
            Vec3::zeros(),
            &OdeConfig::default(),
            StopRule::Lambda(1.0),
        )
        .unwrap();
        let end = t.points.last().unwrap();
        assert!((end - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        assert!((t.lambdas.last().unwrap() - 1.0).abs() < 1e-12);
        assert!(t.lambdas.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn circle_closes_after_one_period() {
        let cfg = OdeConfig::default();
        let t = ode_trace(
            |p| Ok(Vec3::new(-p.y, p.x, 0.0)),
            Vec3::new(1.0, 0.0, 0.0),
            &cfg,
            StopRule::Lambda(2.0 * PI),
        )
        .unwrap();
        let end = t.points.last().unwrap();
        assert!((end - t.seed).norm() <= 10.0 * cfg.rel_tol.max(cfg.abs_tol) * 2.0 * PI);
    }

    #[test]
    fn first_return_stops_near_seed() {
        let t = ode_trace(
            |p| Ok(Vec3::new(-p.y, p.x, 0.0)),
            Vec3::new(1.0, 0.0, 0.0),
            &OdeConfig::default(),
            StopRule::FirstReturn {
                departure: 0.1,
                max_arc: 20.0,
            },
        )
        .unwrap();
        assert!(t.closed_hint);
        let arc = t.total_arc();
        assert!(arc > 2.0 * PI - 0.05 && arc < 2.0 * PI + 0.05, "{arc}");
    }

    #[test]
    fn field_error_gives_partial_trace() {
        let t = ode_trace(
            |p| {
                if p.z > 0.5 {
                    Err(Error::Degenerate("wall".into()))
                } else {
                    Ok(Vec3::new(0.0, 0.0, 1.0))
                }
            },
            Vec3::zeros(),
            &OdeConfig::default(),
            StopRule::Lambda(2.0),
        )
        .unwrap();
        assert!(t.is_partial());
        assert!(t.points.last().unwrap().z <= 0.5 + 1e-12);
    }
}
