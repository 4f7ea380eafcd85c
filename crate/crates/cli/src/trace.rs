use hopfion::numerics::{OdeConfig, StopRule, StreamlineTrace, Termination};
use hopfion::topology::{closed_loop, closure_analysis, linking_polylines, trace_line, TraceSource, CLOSURE_THRESHOLD};
use hopfion::{PacketParams, Vec3};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{Format, SourceSelector, TraceArgs};
use crate::output::{Cell, Document, Metadata};
use crate::{params_from, CliError};

pub fn parse_seeds(s: &str) -> Result<Vec<Vec3>, CliError> {
    s.split(';')
        .map(str::trim)
        .filter(|e| !e.is_empty())
        .map(|e| {
            let v: Vec<f64> = e
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("bad seed '{e}'")))?;
            match v.as_slice() {
                [x, y, z] if v.iter().all(|c| c.is_finite()) => Ok(Vec3::new(*x, *y, *z)),
                _ => Err(CliError::Usage(format!("seed '{e}' needs three finite coordinates"))),
            }
        })
        .collect()
}

pub fn parse_stop(s: &str, a: f64, max_arc: f64) -> Result<StopRule, CliError> {
    let bad = || CliError::Usage(format!("bad stop rule '{s}'"));
    let value = |v: &str| -> Result<f64, CliError> {
        let x: f64 = v.parse().map_err(|_| bad())?;
        if x.is_finite() && x > 0.0 {
            Ok(x)
        } else {
            Err(bad())
        }
    };
    match s.split_once(':') {
        None if s == "return" => Ok(StopRule::FirstReturn {
            departure: 0.1 * a,
            max_arc: max_arc * a,
        }),
        Some(("arc", v)) => Ok(StopRule::ArcLength(value(v)?)),
        Some(("lambda", v)) => Ok(StopRule::Lambda(value(v)?)),
        _ => Err(bad()),
    }
}

pub fn source(sel: SourceSelector) -> TraceSource {
    match sel {
        SourceSelector::Current => TraceSource::CurrentJPlus,
        SourceSelector::Dirac => TraceSource::VelocityDirac,
        SourceSelector::Maxwell => TraceSource::VelocityMaxwell,
    }
}

/// A failed start leaves at most the seed itself.
fn usable(trace: &StreamlineTrace) -> hopfion::Result<()> {
    match &trace.termination {
        Termination::FieldError(msg) if trace.len() < 2 => Err(hopfion::Error::Degenerate(msg.clone())),
        _ => Ok(()),
    }
}

pub struct TraceSet {
    pub traces: Vec<hopfion::Result<StreamlineTrace>>,
    pub summary: Value,
}

pub fn trace_seeds(src: TraceSource, seeds: &[Vec3], t: f64, params: &PacketParams, stop: StopRule) -> TraceSet {
    let cfg = OdeConfig::default();
    let departure = match stop {
        StopRule::FirstReturn { departure, .. } => Some(departure),
        _ => None,
    };
    let traces: Vec<hopfion::Result<StreamlineTrace>> = seeds
        .par_iter()
        .map(|s| {
            let tr = trace_line(src, *s, t, params, stop, &cfg)?;
            usable(&tr)?;
            Ok(tr)
        })
        .collect();
    let per_seed: Vec<Value> = traces
        .iter()
        .enumerate()
        .map(|(i, r)| match r {
            Ok(tr) => {
                let closure = closure_analysis(tr, departure).ok();
                json!({
                    "seed_index": i,
                    "seed": [tr.seed.x, tr.seed.y, tr.seed.z],
                    "status": "ok",
                    "termination": format!("{:?}", tr.termination),
                    "points": tr.len(),
                    "arc_length": tr.total_arc(),
                    "closure": closure,
                    "closed": closure.map(|c| c.metric < CLOSURE_THRESHOLD),
                })
            }
            Err(e) => json!({
                "seed_index": i,
                "seed": [seeds[i].x, seeds[i].y, seeds[i].z],
                "status": "error",
                "error": e.to_string(),
            }),
        })
        .collect();
    let loops: Vec<Option<Vec<Vec3>>> = traces
        .iter()
        .map(|r| r.as_ref().ok().and_then(|tr| closed_loop(tr, CLOSURE_THRESHOLD).ok()))
        .collect();
    let mut linking = Vec::new();
    for i in 0..loops.len() {
        for j in i + 1..loops.len() {
            let entry = match (&loops[i], &loops[j]) {
                (Some(c1), Some(c2)) => match linking_polylines(c1, c2) {
                    Ok(lk) => json!({ "i": i, "j": j, "linking": lk, "rounded": lk.round() }),
                    Err(e) => json!({ "i": i, "j": j, "error": e.to_string() }),
                },
                _ => json!({ "i": i, "j": j, "error": "curve not closed" }),
            };
            linking.push(entry);
        }
    }
    TraceSet {
        traces,
        summary: json!({
            "closure_threshold": CLOSURE_THRESHOLD,
            "traces": per_seed,
            "linking": linking,
            "linking_orientation": "curves oriented along the flow",
        }),
    }
}

pub fn run(args: &TraceArgs) -> Result<(), CliError> {
    let params = params_from(&args.common)?;
    let seeds = match &args.seeds {
        Some(s) => parse_seeds(s)?,
        None => vec![Vec3::new(params.a, 0.0, 0.0), Vec3::new(1.5 * params.a, 0.0, 0.0)],
    };
    if seeds.is_empty() {
        return Err(CliError::Usage("no seeds".into()));
    }
    if !(args.max_arc.is_finite() && args.max_arc > 0.0) {
        return Err(CliError::Usage("max-arc must be positive".into()));
    }
    let stop = parse_stop(&args.stop, params.a, args.max_arc)?;
    let src = source(args.source);
    let set = trace_seeds(src, &seeds, args.t, &params, stop);
    let mut rows = Vec::new();
    for (i, tr) in set.traces.iter().enumerate() {
        if let Ok(tr) = tr {
            for k in 0..tr.len() {
                let p = tr.points[k];
                rows.push(vec![
                    Cell::Int(i as i64),
                    tr.lambdas[k].into(),
                    tr.arc[k].into(),
                    p.x.into(),
                    p.y.into(),
                    p.z.into(),
                ]);
            }
        }
    }
    let settings = json!({
        "source": format!("{src:?}"),
        "t": args.t,
        "stop": args.stop,
        "max_arc_over_a": args.max_arc,
        "seeds": seeds.iter().map(|s| [s.x, s.y, s.z]).collect::<Vec<_>>(),
        "current_kind": "psi+",
    });
    let doc = Document {
        metadata: Metadata::new("trace", &args.common, &params, settings),
        summary: Some(set.summary),
        columns: ["seed", "lambda", "arc", "x", "y", "z"].map(String::from).to_vec(),
        rows,
    };
    doc.write(args.common.format_or(Format::Csv), args.common.out.as_deref())?;
    let failed = set.traces.iter().filter(|t| t.is_err()).count();
    for (i, t) in set.traces.iter().enumerate() {
        if let Err(e) = t {
            eprintln!("hopfion: seed {i}: {e}");
        }
    }
    if failed == set.traces.len() {
        return Err(CliError::Aborted("every seed failed".into()));
    }
    Ok(())
}
