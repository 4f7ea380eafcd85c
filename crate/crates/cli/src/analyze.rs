use hopfion::dirac::{norm_integral, norm_momentum_integral, normalization_constant, BispinorKind};
use hopfion::dynamics::{
    default_times, momentum_moments, momentum_space_r2, spatial_moment, spreading_fit, uncertainty_product,
    HEISENBERG_3D,
};
use hopfion::numerics::Scheme3d;
use hopfion::{PacketParams, ToleranceConfig};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{Analysis, AnalyzeArgs, Format};
use crate::output::{with_output, Cell, Document, Metadata};
use crate::report::{Check, ReportBundle, RunReport};
use crate::{kind_from, params_from, tolerance_from, CliError};

/// Relative agreement asked of quadrature results.
pub const AGREEMENT_TOL: f64 = 1e-6;
pub const FIT_RESIDUAL_TOL: f64 = 1e-4;
/// Allowed excess of `Δr·Δp` over 3/2 at `a = 10`.
pub const UNCERTAINTY_EXCESS_TOL: f64 = 0.05;

pub const SWEEP_SIZES: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

pub fn columns(analysis: Analysis) -> Vec<&'static str> {
    let mut c = vec!["kind", "l", "a", "v"];
    c.extend(match analysis {
        Analysis::Norm => vec!["norm_position", "norm_position_err", "norm_momentum", "n_constant"],
        Analysis::Moments => vec!["t", "r2", "r2_err", "r2_momentum", "p2", "v2", "pz"],
        Analysis::Spreading => vec!["a_coef", "b_coef", "v2", "fit_residual"],
        Analysis::Uncertainty => vec![
            "dr",
            "dp_central",
            "dp_raw",
            "mean_z",
            "mean_pz",
            "product",
            "product_raw",
        ],
    });
    c
}

pub struct Sweep {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub report: RunReport,
}

struct Point {
    kind: BispinorKind,
    params: PacketParams,
}

type PointResult = hopfion::Result<(Vec<Vec<f64>>, Vec<Check>)>;

fn evaluate(analysis: Analysis, pt: &Point, tol: &ToleranceConfig, check_tol: f64) -> PointResult {
    let (kind, p) = (pt.kind, &pt.params);
    let tag = format!("{kind}/l={}/a={}/v={}", p.l, p.a, p.v);
    let one_d = ToleranceConfig::special_functions();
    match analysis {
        Analysis::Norm => {
            let r = norm_integral(kind, p, Scheme3d::Axisymmetric, tol)?;
            let q = norm_momentum_integral(kind, p, &one_d)?;
            let n = normalization_constant(kind, p)?.n;
            let checks = vec![
                Check::at_most(format!("norm_position/{tag}"), (r.value - 1.0).abs(), check_tol, ""),
                Check::at_most(format!("norm_momentum/{tag}"), (q - 1.0).abs(), check_tol, ""),
            ];
            Ok((vec![vec![r.value, r.error_estimate, q, n]], checks))
        }
        Analysis::Moments => {
            let r2_0 = momentum_space_r2(kind, p, tol)?;
            let mm = momentum_moments(kind, p, &one_d)?;
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for t in default_times(p) {
                let m = spatial_moment(kind, p, t, 2, Scheme3d::Axisymmetric, tol)?;
                let predicted = r2_0 + t * t * mm.v2;
                worst = worst.max((m.value - predicted).abs() / predicted);
                rows.push(vec![t, m.value, m.error, predicted, mm.p2, mm.v2, mm.pz]);
            }
            let check = Check::at_most(
                format!("r2_vs_momentum/{tag}"),
                worst,
                check_tol.max(FIT_RESIDUAL_TOL),
                "max relative gap over t",
            );
            Ok((rows, vec![check]))
        }
        Analysis::Spreading => {
            let fit = spreading_fit(kind, p, &default_times(p), tol)?;
            let v2 = momentum_moments(kind, p, &one_d)?.v2;
            let checks = vec![
                Check::at_most(format!("fit_residual/{tag}"), fit.fit_residual, FIT_RESIDUAL_TOL, ""),
                Check::new(
                    format!("b_in_unit_interval/{tag}"),
                    fit.b_coef > 0.0 && fit.b_coef < 1.0,
                    fit.b_coef,
                    1.0,
                    "0 < B < 1",
                ),
            ];
            Ok((vec![vec![fit.a_coef, fit.b_coef, v2, fit.fit_residual]], checks))
        }
        Analysis::Uncertainty => {
            let u = uncertainty_product(kind, p, tol)?;
            let check = Check::new(
                format!("above_bound/{tag}"),
                u.product > HEISENBERG_3D,
                u.product,
                HEISENBERG_3D,
                "product > 3/2",
            );
            Ok((
                vec![vec![
                    u.dr,
                    u.dp_central,
                    u.dp_raw,
                    u.mean_z,
                    u.mean_pz,
                    u.product,
                    u.product_raw,
                ]],
                vec![check],
            ))
        }
    }
}

/// Checks across the size sweep of one (kind, l) series.
fn series_checks(analysis: Analysis, kind: BispinorKind, l: u32, sizes: &[f64], values: &[Option<f64>]) -> Vec<Check> {
    let mut out = Vec::new();
    let known: Vec<(f64, f64)> = sizes
        .iter()
        .zip(values)
        .filter_map(|(a, v)| v.map(|v| (*a, v)))
        .collect();
    let name = match analysis {
        Analysis::Spreading => "b_decreasing",
        Analysis::Uncertainty => "product_decreasing",
        _ => return out,
    };
    if known.len() >= 2 {
        let mut sorted = known.clone();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        let steps: Vec<f64> = sorted.windows(2).map(|w| w[1].1 - w[0].1).collect();
        let worst = steps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push(Check::new(
            format!("{name}/{kind}/l={l}"),
            worst < 0.0,
            worst,
            0.0,
            "largest step across increasing a",
        ));
    }
    if analysis == Analysis::Uncertainty && l == 0 {
        if let Some((_, v)) = known.iter().find(|(a, _)| *a == 10.0) {
            let excess = v / HEISENBERG_3D - 1.0;
            out.push(Check::at_most(
                format!("near_bound_at_a10/{kind}/l=0"),
                excess,
                UNCERTAINTY_EXCESS_TOL,
                "relative excess over 3/2",
            ));
        }
    }
    out
}

pub fn sweep(
    analysis: Analysis,
    kinds: &[BispinorKind],
    ls: &[u32],
    sizes: &[f64],
    base: &PacketParams,
    tol: &ToleranceConfig,
    check_tol: f64,
) -> Result<Sweep, CliError> {
    let mut points = Vec::new();
    for &kind in kinds {
        for &l in ls {
            for &a in sizes {
                let params = PacketParams::new(base.m, a, l, base.v).map_err(|e| CliError::Usage(e.to_string()))?;
                points.push(Point { kind, params });
            }
        }
    }
    let results: Vec<PointResult> = points
        .par_iter()
        .map(|pt| evaluate(analysis, pt, tol, check_tol))
        .collect();
    let mut report = RunReport::new(format!("analyze-{analysis:?}").to_lowercase());
    let mut rows = Vec::new();
    let mut headline = Vec::new();
    for (pt, res) in points.iter().zip(&results) {
        let p = &pt.params;
        match res {
            Ok((prow, checks)) => {
                for r in prow {
                    let mut row: Vec<Cell> = vec![pt.kind.name().into(), p.l.into(), p.a.into(), p.v.into()];
                    row.extend(r.iter().map(|v| Cell::Num(*v)));
                    rows.push(row);
                }
                checks.iter().cloned().for_each(|c| report.push(c));
                headline.push(match analysis {
                    Analysis::Spreading => Some(prow[0][1]),
                    Analysis::Uncertainty => Some(prow[0][5]),
                    _ => None,
                });
            }
            Err(e) => {
                report.push(Check::error(
                    format!("point/{}/l={}/a={}/v={}", pt.kind, p.l, p.a, p.v),
                    check_tol,
                    e,
                ));
                headline.push(None);
            }
        }
    }
    for &kind in kinds {
        for &l in ls {
            let vals: Vec<Option<f64>> = points
                .iter()
                .zip(&headline)
                .filter(|(pt, _)| pt.kind == kind && pt.params.l == l)
                .map(|(_, h)| *h)
                .collect();
            for c in series_checks(analysis, kind, l, sizes, &vals) {
                report.push(c);
            }
        }
    }
    Ok(Sweep {
        columns: columns(analysis),
        rows,
        report,
    })
}

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    let params = params_from(&args.common)?;
    let kinds = if args.all_kinds {
        BispinorKind::ALL.to_vec()
    } else {
        vec![kind_from(&args.common)?]
    };
    let ls = args.l_list.clone().unwrap_or_else(|| vec![params.l]);
    let sizes = args.a_list.clone().unwrap_or_else(|| match args.analysis {
        Analysis::Spreading | Analysis::Uncertainty => SWEEP_SIZES.to_vec(),
        _ => vec![params.a],
    });
    if ls.is_empty() || sizes.is_empty() {
        return Err(CliError::Usage("empty sweep".into()));
    }
    let tol = tolerance_from(&args.common, ToleranceConfig::quadrature_3d())?;
    let check_tol = args.common.tol.unwrap_or(AGREEMENT_TOL).max(AGREEMENT_TOL);
    let start = std::time::Instant::now();
    let mut s = sweep(args.analysis, &kinds, &ls, &sizes, &params, &tol, check_tol)?;
    s.report.wall_time = start.elapsed().as_secs_f64();
    let settings = json!({
        "analysis": format!("{:?}", args.analysis).to_lowercase(),
        "kinds": kinds.iter().map(|k| k.name()).collect::<Vec<_>>(),
        "l_list": ls,
        "a_list": sizes,
        "quadrature": tol,
        "scheme": "axisymmetric",
        "times": "0, a/2, a, 3a/2, 2a",
    });
    let metadata = Metadata::new("analyze", &args.common, &params, settings);
    let bundle = ReportBundle::new(
        serde_json::to_value(&metadata).map_err(|e| CliError::Io(e.to_string()))?,
        vec![s.report.clone()],
    );
    let doc = Document {
        metadata,
        summary: Some(serde_json::to_value(&s.report).map_err(|e| CliError::Io(e.to_string()))?),
        columns: s.columns.iter().map(|c| c.to_string()).collect(),
        rows: s.rows,
    };
    doc.write(args.common.format_or(Format::Csv), args.common.out.as_deref())?;
    if let Some(path) = &args.report {
        with_output(Some(path), |w| bundle.write_to(w))?;
    }
    let failed = s.report.failed_checks().count();
    for c in s.report.failed_checks() {
        eprintln!("FAIL {}: {:e} (tol {:e}) {}", c.name, c.measured, c.tolerance, c.detail);
    }
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
