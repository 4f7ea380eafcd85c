//! Verification suites, one per checked property family. Random points come
//! from a ChaCha stream seeded per suite, so a report depends only on the
//! seed, level, and tolerance override.

use hopfion::dirac::{
    current_conservation_residual, dirac_residual, field_mz_check, four_current, inverse_norm_square, mz_check,
    norm_integral, norm_momentum_integral, normalization_constant, rotate_pi_x, BispinorKind, DiracState,
};
use hopfion::dynamics::{charge_profile, Axis};
use hopfion::kg_fields::kg_residual;
use hopfion::maxwell::{derived_em, maxwell_residual, rs_vector, rs_vector_mirror, velocity_maxwell};
use hopfion::numerics::{OdeConfig, Scheme3d, StopRule};
use hopfion::topology::{
    closure_metric, hopf_closed_form, hopf_level_line, hopf_map, linking_number, trace_line, velocity_dirac,
    TraceSource,
};
use hopfion::{Complex64, PacketParams, SpaceTimePoint, ToleranceConfig, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::analyze::{sweep, SWEEP_SIZES};
use crate::args::{Analysis, Format, Level, VerifyArgs};
use crate::output::{fmt_num, with_output, CONVENTIONS};
use crate::report::{Check, ReportBundle, RunReport};
use crate::CliError;

pub const SUITES: [&str; 10] = [
    "residuals",
    "normalization",
    "angular_momentum",
    "hopf_map",
    "null_and_speeds",
    "topology",
    "conservation",
    "spreading",
    "uncertainty",
    "boost",
];

pub const RESIDUAL_TOL: f64 = 1e-6;
pub const HOPF_TOL: f64 = 1e-10;
pub const NULL_TOL: f64 = 1e-12;
pub const SPEED_TOL: f64 = 1e-10;
pub const CLOSURE_TOL: f64 = 1e-3;
pub const LINKING_TOL: f64 = 0.05;
pub const CAUSALITY_TOL: f64 = 1e-12;
pub const PROFILE_MASS_TOL: f64 = 2e-3;

const SPEEDS: [f64; 3] = [0.0, 0.5, 0.99];

/// Settings shared by every suite of one run.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub level: Level,
    pub seed: u64,
    /// Replaces the tolerance of every bounded numeric check.
    pub tol_override: Option<f64>,
}

impl Ctx {
    fn tol(&self, default: f64) -> f64 {
        self.tol_override.unwrap_or(default)
    }

    fn count(&self, quick: usize, full: usize) -> usize {
        match self.level {
            Level::Quick => quick,
            Level::Full => full,
        }
    }

    fn rng(&self, suite: usize, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (suite as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        rng.set_stream(stream);
        rng
    }

    fn at_most(&self, name: String, measured: f64, default: f64, detail: &str) -> Check {
        Check::at_most(name, measured, self.tol(default), detail)
    }
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<SpaceTimePoint> {
    (0..n)
        .map(|_| {
            let mut c = || rng.gen_range(-half..half);
            SpaceTimePoint::new(c(), c(), c(), c())
        })
        .collect()
}

/// Largest value of `f` over `points`; NaN if any value is NaN.
fn worst<F>(points: &[SpaceTimePoint], f: F) -> hopfion::Result<f64>
where
    F: Fn(&SpaceTimePoint) -> hopfion::Result<f64> + Sync + Send,
{
    let vals = points.par_iter().map(f).collect::<hopfion::Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, |acc, v| {
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(v)
        }
    }))
}

fn bounded(ctx: &Ctx, name: String, default: f64, detail: &str, value: hopfion::Result<f64>) -> Check {
    match value {
        Ok(v) => ctx.at_most(name, v, default, detail),
        Err(e) => Check::error(name, ctx.tol(default), e),
    }
}

fn params(m: f64, a: f64, l: u32, v: f64) -> PacketParams {
    PacketParams::new(m, a, l, v).expect("fixed suite parameters are valid")
}

fn residuals(ctx: &Ctx, speeds: &[f64]) -> RunReport {
    let mut r = RunReport::new("residuals");
    let n = ctx.count(5, 30);
    for (vi, &v) in speeds.iter().enumerate() {
        for l in 0..3 {
            let mut rng = ctx.rng(1, (vi * 3 + l as usize) as u64);
            let pts = random_points(&mut rng, n, 2.0);
            let p = params(1.0, 1.0, l, v);
            r.run(|| {
                bounded(
                    ctx,
                    format!("kg/l={l}/v={v}"),
                    RESIDUAL_TOL,
                    "max relative residual",
                    worst(&pts, |q| kg_residual(q, &p)),
                )
            });
            for kind in BispinorKind::ALL {
                r.run(|| {
                    bounded(
                        ctx,
                        format!("dirac/{kind}/l={l}/v={v}"),
                        RESIDUAL_TOL,
                        "max relative residual",
                        worst(&pts, |q| dirac_residual(kind, q, &p)),
                    )
                });
            }
        }
    }
    let mut rng = ctx.rng(1, 100);
    let pts = random_points(&mut rng, n, 2.0);
    for l in 0..3 {
        r.run(|| {
            bounded(
                ctx,
                format!("maxwell/l={l}"),
                RESIDUAL_TOL,
                "max curl/div residual",
                worst(&pts, |q| maxwell_residual(q, 1.0, l)),
            )
        });
    }
    r
}

/// Fixed kind, winding, and size combinations of the normalization suite.
pub const NORM_CASES: [(BispinorKind, u32, f64); 9] = [
    (BispinorKind::PsiPlus, 0, 1.0),
    (BispinorKind::PsiPlus, 2, 0.5),
    (BispinorKind::PsiMinus, 1, 2.0),
    (BispinorKind::PsiMinus, 0, 5.0),
    (BispinorKind::PhiPlus, 0, 0.5),
    (BispinorKind::PhiPlus, 1, 1.0),
    (BispinorKind::PhiMinus, 2, 1.0),
    (BispinorKind::PhiMinus, 0, 2.0),
    (BispinorKind::PsiPlus, 1, 10.0),
];

fn normalization(ctx: &Ctx) -> RunReport {
    let mut r = RunReport::new("normalization");
    let scheme = match ctx.level {
        Level::Quick => Scheme3d::Axisymmetric,
        Level::Full => Scheme3d::Spherical,
    };
    let tol3 = ToleranceConfig::quadrature_3d();
    let tol1 = ToleranceConfig::special_functions();
    for (kind, l, a) in NORM_CASES {
        let p = params(1.0, a, l, 0.0);
        let tag = format!("{kind}/l={l}/a={a}");
        r.run(|| {
            bounded(
                ctx,
                format!("position/{tag}"),
                RESIDUAL_TOL,
                "|∫j0 d3r - 1|",
                norm_integral(kind, &p, scheme, &tol3).map(|q| (q.value - 1.0).abs()),
            )
        });
        r.run(|| {
            bounded(
                ctx,
                format!("momentum/{tag}"),
                RESIDUAL_TOL,
                "|radial momentum integral - 1|",
                norm_momentum_integral(kind, &p, &tol1).map(|q| (q - 1.0).abs()),
            )
        });
        r.run(|| {
            let gap = normalization_constant(kind, &p).and_then(|nc| {
                let direct = inverse_norm_square(nc.l_effective, a, 1.0)?.sqrt().recip();
                Ok((nc.n / direct - 1.0).abs())
            });
            bounded(
                ctx,
                format!("constant/{tag}"),
                RESIDUAL_TOL,
                "log-scaled vs direct N",
                gap,
            )
        });
    }
    r
}

fn angular_momentum(ctx: &Ctx) -> RunReport {
    let mut r = RunReport::new("angular_momentum");
    let n = ctx.count(3, 10);
    for kind in BispinorKind::ALL {
        for l in 0..3u32 {
            let mut rng = ctx.rng(3, l as u64);
            let pts = random_points(&mut rng, n, 1.5);
            let p = params(1.0, 1.0, l, 0.0);
            let want = l as f64 + 0.5;
            let detail = match kind {
                BispinorKind::PsiPlus | BispinorKind::PsiMinus => "|M_z - (l + 1/2)|",
                _ => "|M_z - (l + 1/2)|, measured value for this kind",
            };
            r.run(|| {
                bounded(
                    ctx,
                    format!("mz/{kind}/l={l}"),
                    RESIDUAL_TOL,
                    detail,
                    worst(
                        &pts,
                        |q| Ok((mz_check(kind, q, &p)? - Complex64::new(want, 0.0)).norm()),
                    ),
                )
            });
            r.run(|| {
                let value = DiracState::new(kind, p, false).and_then(|s| {
                    let rotated = rotate_pi_x(s);
                    worst(&pts, |q| {
                        Ok((field_mz_check(&rotated, q)? + Complex64::new(want, 0.0)).norm())
                    })
                });
                bounded(
                    ctx,
                    format!("mz_rotated/{kind}/l={l}"),
                    RESIDUAL_TOL,
                    "|M_z + (l + 1/2)| after rotate_pi_x",
                    value,
                )
            });
        }
    }
    r
}

fn hopf_gap(u: Complex64, exact: Complex64) -> f64 {
    (u - exact).norm() / exact.norm().max(1.0)
}

fn hopf_suite(ctx: &Ctx) -> RunReport {
    let mut r = RunReport::new("hopf_map");
    let n = ctx.count(20, 100);
    let mut rng = ctx.rng(4, 0);
    let cases: Vec<(SpaceTimePoint, u32, f64)> = (0..n)
        .map(|i| {
            let mut c = || rng.gen_range(-3.0..3.0);
            let p = SpaceTimePoint::new(c(), c(), c(), c());
            (p, (i % 3) as u32, rng.gen_range(0.3..3.0))
        })
        .collect();
    let finite = |h: hopfion::topology::HopfValue| {
        h.finite()
            .ok_or_else(|| hopfion::Error::Degenerate("Hopf value at infinity".into()))
    };
    let gaps: hopfion::Result<Vec<(f64, f64)>> = cases
        .par_iter()
        .map(|(p, l, a)| {
            let exact = finite(hopf_closed_form(p, *a))?;
            let vd = velocity_dirac(p, &params(1.0, *a, *l, 0.0))?;
            let vm = velocity_maxwell(p, *a)?;
            Ok((
                hopf_gap(finite(hopf_map(&vd))?, exact),
                hopf_gap(finite(hopf_map(&vm))?, exact),
            ))
        })
        .collect();
    let t_nonzero = cases.iter().filter(|c| c.0.t != 0.0).count();
    let detail = format!("max relative gap over {n} points, {t_nonzero} with t != 0");
    r.run(|| {
        bounded(
            ctx,
            "dirac_vs_closed_form".into(),
            HOPF_TOL,
            &detail,
            gaps.clone().map(|g| g.iter().map(|x| x.0).fold(0.0, f64::max)),
        )
    });
    r.run(|| {
        bounded(
            ctx,
            "maxwell_vs_closed_form".into(),
            HOPF_TOL,
            &detail,
            gaps.clone().map(|g| g.iter().map(|x| x.1).fold(0.0, f64::max)),
        )
    });
    let lines = ctx.count(2, 5);
    let mut rng = ctx.rng(4, 1);
    let level_gap = (|| -> hopfion::Result<f64> {
        let mut gap: f64 = 0.0;
        for _ in 0..lines {
            let ups = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let t = rng.gen_range(-1.5..1.5);
            let p = params(1.0, 1.0, 0, 0.0);
            let line = hopf_level_line(ups, t, 1.0, (-2.0, 2.0))?;
            for x in line.sample(20) {
                let q = SpaceTimePoint::at(x, t);
                gap = gap.max(hopf_gap(finite(hopf_map(&velocity_maxwell(&q, 1.0)?))?, ups));
                gap = gap.max(hopf_gap(finite(hopf_map(&velocity_dirac(&q, &p)?))?, ups));
            }
        }
        Ok(gap)
    })();
    r.run(|| {
        bounded(
            ctx,
            "level_line_round_trip".into(),
            1e-9,
            "max relative gap along sampled level lines",
            level_gap,
        )
    });
    r
}

fn null_and_speeds(ctx: &Ctx) -> RunReport {
    let mut r = RunReport::new("null_and_speeds");
    let n = ctx.count(20, 100);
    let mut rng = ctx.rng(5, 0);
    let pts = random_points(&mut rng, n, 3.0);
    for l in 0..3u32 {
        r.run(|| {
            bounded(
                ctx,
                format!("null/l={l}"),
                NULL_TOL,
                "|F.F| / |F|^2",
                worst(&pts, |q| Ok(rs_vector(q, 1.0, l)?.null_defect())),
            )
        });
        r.run(|| {
            bounded(
                ctx,
                format!("maxwell_speed/l={l}"),
                SPEED_TOL,
                "| |v_M| - 1 | from the field",
                worst(&pts, |q| {
                    Ok((derived_em(&rs_vector_mirror(q, 1.0, l)?)?.vm.norm() - 1.0).abs())
                }),
            )
        });
        r.run(|| {
            let v = worst(&pts, |q| velocity_dirac(q, &params(1.0, 1.0, l, 0.0)).map(|v| v.norm()));
            match v {
                Ok(v) => Check::new(
                    format!("dirac_subluminal/l={l}"),
                    v < 1.0,
                    v,
                    1.0,
                    "max |v_D|, must stay below 1",
                ),
                Err(e) => Check::error(format!("dirac_subluminal/l={l}"), 1.0, e),
            }
        });
    }
    r.run(|| {
        bounded(
            ctx,
            "maxwell_speed_closed_form".into(),
            SPEED_TOL,
            "| |v_M| - 1 |",
            worst(&pts, |q| Ok((velocity_maxwell(q, 1.0)?.norm() - 1.0).abs())),
        )
    });
    let mut rng = ctx.rng(5, 1);
    let fixed = random_points(&mut rng, 10, 1.5);
    let bad: hopfion::Result<usize> = fixed
        .iter()
        .map(|q| {
            let vm = velocity_maxwell(q, 1.0)?;
            let gaps = [1.0, 0.1, 0.01]
                .iter()
                .map(|&m| Ok((velocity_dirac(q, &params(m, 1.0, 1, 0.0))? - vm).norm()))
                .collect::<hopfion::Result<Vec<f64>>>()?;
            Ok(usize::from(!(gaps[1] < gaps[0] && gaps[2] < gaps[1])))
        })
        .sum();
    r.run(|| match bad {
        Ok(b) => Check::new(
            "massless_limit",
            b == 0,
            b as f64,
            0.0,
            "points where |v_D - v_M| fails to fall as m -> 0",
        ),
        Err(e) => Check::error("massless_limit", 0.0, e),
    });
    r
}

fn topology(ctx: &Ctx) -> RunReport {
    let mut r = RunReport::new("topology");
    let a = 1.0;
    let p = params(1.0, a, 0, 0.0);
    let cfg = OdeConfig::default();
    let stop = StopRule::FirstReturn {
        departure: 0.1 * a,
        max_arc: 200.0 * a,
    };
    let seeds = [Vec3::new(a, 0.0, 0.0), Vec3::new(1.5 * a, 0.0, 0.0)];
    let traces: Vec<_> = seeds
        .par_iter()
        .map(|s| trace_line(TraceSource::VelocityMaxwell, *s, 0.0, &p, stop, &cfg))
        .collect();
    let mut maxwell_closure: f64 = 0.0;
    for (i, t) in traces.iter().enumerate() {
        let c = t.as_ref().map_err(Clone::clone).and_then(closure_metric);
        if let Ok(c) = c {
            maxwell_closure = maxwell_closure.max(c);
        }
        r.run(|| {
            bounded(
                ctx,
                format!("maxwell_closure/seed{i}"),
                CLOSURE_TOL,
                "return distance / diameter",
                c,
            )
        });
    }
    r.run(|| {
        let lk = match (&traces[0], &traces[1]) {
            (Ok(t1), Ok(t2)) => linking_number(t1, t2),
            (Err(e), _) | (_, Err(e)) => Err(e.clone()),
        };
        let detail = match &lk {
            Ok(v) => format!("linking number {v}; sign follows the flow orientation"),
            Err(_) => String::new(),
        };
        bounded(
            ctx,
            "maxwell_linking".into(),
            LINKING_TOL,
            &detail,
            lk.map(|v| (v.abs() - 1.0).abs()),
        )
    });
    r.run(|| {
        let d = trace_line(TraceSource::VelocityDirac, seeds[0], 0.0, &p, stop, &cfg).and_then(|t| closure_metric(&t));
        match d {
            Ok(c) => {
                let ratio = c / maxwell_closure;
                Check::new(
                    "dirac_keeps_winding",
                    ratio > 10.0,
                    ratio,
                    10.0,
                    format!("Dirac closure {c:e} over Maxwell closure, must exceed 10"),
                )
            }
            Err(e) => Check::error("dirac_keeps_winding", 10.0, e),
        }
    });
    r
}

fn conservation(ctx: &Ctx, speeds: &[f64], suite: &str) -> RunReport {
    let mut r = RunReport::new(suite);
    let n = ctx.count(5, 30);
    for (vi, &v) in speeds.iter().enumerate() {
        for l in 0..3u32 {
            let mut rng = ctx.rng(7, (vi * 3 + l as usize) as u64);
            let pts = random_points(&mut rng, n, 2.0);
            let p = params(1.0, 1.0, l, v);
            for kind in BispinorKind::ALL {
                let tag = format!("{kind}/l={l}/v={v}");
                r.run(|| {
                    bounded(
                        ctx,
                        format!("conservation/{tag}"),
                        RESIDUAL_TOL,
                        "max relative divergence",
                        worst(&pts, |q| current_conservation_residual(kind, q, &p)),
                    )
                });
                r.run(|| {
                    bounded(
                        ctx,
                        format!("causality/{tag}"),
                        CAUSALITY_TOL,
                        "max (|j|^2 - j0^2)/j0^2",
                        worst(&pts, |q| {
                            let j = four_current(kind, q, &p)?;
                            Ok(if j.j0 > 0.0 {
                                (-j.interval() / (j.j0 * j.j0)).max(0.0)
                            } else {
                                f64::NAN
                            })
                        }),
                    )
                });
            }
        }
    }
    r
}

fn renamed(mut report: RunReport, name: &str) -> RunReport {
    report.suite = name.to_string();
    report
}

fn spreading(ctx: &Ctx) -> RunReport {
    let sizes: &[f64] = match ctx.level {
        Level::Quick => &[0.5, 1.0, 2.0],
        Level::Full => &SWEEP_SIZES,
    };
    let tol = ToleranceConfig::quadrature_3d();
    let base = params(1.0, 1.0, 0, 0.0);
    match sweep(
        Analysis::Spreading,
        &[BispinorKind::PsiPlus],
        &[0, 1, 2],
        sizes,
        &base,
        &tol,
        ctx.tol(RESIDUAL_TOL),
    ) {
        Ok(s) => renamed(s.report, "spreading"),
        Err(e) => {
            let mut r = RunReport::new("spreading");
            r.push(Check::error("sweep", 0.0, e));
            r
        }
    }
}

fn uncertainty(ctx: &Ctx) -> RunReport {
    let tol = ToleranceConfig::quadrature_3d();
    let base = params(1.0, 1.0, 0, 0.0);
    match sweep(
        Analysis::Uncertainty,
        &[BispinorKind::PsiPlus],
        &[0],
        &SWEEP_SIZES,
        &base,
        &tol,
        ctx.tol(RESIDUAL_TOL),
    ) {
        Ok(s) => renamed(s.report, "uncertainty"),
        Err(e) => {
            let mut r = RunReport::new("uncertainty");
            r.push(Check::error("sweep", 0.0, e));
            r
        }
    }
}

fn boost(ctx: &Ctx) -> RunReport {
    let boosted = [0.9, 0.99];
    let mut r = renamed(residuals(ctx, &boosted), "boost");
    for c in conservation(ctx, &boosted, "boost").checks {
        r.push(c);
    }
    let tol3 = ToleranceConfig::quadrature_3d();
    for v in boosted {
        for kind in BispinorKind::ALL {
            let p = params(1.0, 1.0, 0, v);
            r.run(|| {
                bounded(
                    ctx,
                    format!("norm/{kind}/v={v}"),
                    RESIDUAL_TOL,
                    "|∫j0 d3r - 1|",
                    norm_integral(kind, &p, Scheme3d::Axisymmetric, &tol3).map(|q| (q.value - 1.0).abs()),
                )
            });
        }
    }
    let ax = Axis::new(-6.0, 6.0, 201).expect("valid profile axis");
    let mut prev = f64::INFINITY;
    for v in [0.0, 0.9, 0.99] {
        let prof = charge_profile(BispinorKind::PsiPlus, &params(1.0, 1.0, 0, v), ax, ax, 0.0);
        match prof {
            Ok(prof) => {
                let m = prof.moments();
                let ratio = m.zz / m.xx;
                r.push(Check::new(
                    format!("profile_ratio/v={v}"),
                    ratio < prev,
                    ratio,
                    prev,
                    "<z^2>/<x^2>, must fall below the previous speed's value",
                ));
                r.push(ctx.at_most(
                    format!("profile_mass/v={v}"),
                    (m.mass - 1.0).abs(),
                    PROFILE_MASS_TOL,
                    "grid charge minus 1",
                ));
                prev = ratio;
            }
            Err(e) => r.push(Check::error(format!("profile_ratio/v={v}"), prev, e)),
        }
    }
    r
}

pub fn run_suite(name: &str, ctx: &Ctx) -> Result<RunReport, CliError> {
    let start = std::time::Instant::now();
    let mut r = match name {
        "residuals" => residuals(ctx, &SPEEDS),
        "normalization" => normalization(ctx),
        "angular_momentum" => angular_momentum(ctx),
        "hopf_map" => hopf_suite(ctx),
        "null_and_speeds" => null_and_speeds(ctx),
        "topology" => topology(ctx),
        "conservation" => conservation(ctx, &SPEEDS, "conservation"),
        "spreading" => spreading(ctx),
        "uncertainty" => uncertainty(ctx),
        "boost" => boost(ctx),
        _ => {
            return Err(CliError::Usage(format!(
                "unknown suite '{name}'; known: {}",
                SUITES.join(", ")
            )))
        }
    };
    r.wall_time = start.elapsed().as_secs_f64();
    Ok(r)
}

pub fn run_suites(ctx: &Ctx, names: &[String]) -> Result<ReportBundle, CliError> {
    let reports = names.iter().map(|n| run_suite(n, ctx)).collect::<Result<Vec<_>, _>>()?;
    let metadata = json!({
        "tool": "hopfion",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "verify",
        "level": ctx.level,
        "rng_seed": ctx.seed,
        "tol_override": ctx.tol_override,
        "suites": names,
        "conventions": CONVENTIONS,
    });
    Ok(ReportBundle::new(metadata, reports))
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    if let Some(t) = args.common.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Usage(format!("tolerance must be positive, got {t}")));
        }
    }
    let ctx = Ctx {
        level: args.level,
        seed: args.common.rng_seed,
        tol_override: args.common.tol,
    };
    let names: Vec<String> = match &args.suites {
        Some(s) => s.clone(),
        None => SUITES.iter().map(|s| s.to_string()).collect(),
    };
    let bundle = run_suites(&ctx, &names)?;
    match args.common.format_or(Format::Json) {
        Format::Json => with_output(args.common.out.as_deref(), |w| bundle.write_to(w))?,
        Format::Csv => with_output(args.common.out.as_deref(), |w| {
            writeln!(w, "# metadata: {}", bundle.metadata)?;
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["suite", "check", "status", "measured", "tolerance", "detail"])
                .map_err(|e| CliError::Io(e.to_string()))?;
            for r in &bundle.reports {
                for c in &r.checks {
                    let status = if c.passed() { "pass" } else { "fail" };
                    csv.write_record([
                        &r.suite,
                        &c.name,
                        status,
                        &fmt_num(c.measured),
                        &fmt_num(c.tolerance),
                        &c.detail,
                    ])
                    .map_err(|e| CliError::Io(e.to_string()))?;
                }
            }
            csv.flush()?;
            Ok(())
        })?,
    }
    bundle.print_summary();
    let failed: usize = bundle.reports.iter().map(|r| r.failed_checks().count()).sum();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
