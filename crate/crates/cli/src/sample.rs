use hopfion::dirac::{four_current, BispinorKind};
use hopfion::kg_fields::scalar_field;
use hopfion::maxwell::{rs_vector, velocity_maxwell};
use hopfion::topology::{hopf_map, source_field, velocity_from_current, HopfValue, TraceSource};
use hopfion::{PacketParams, SpaceTimePoint, Vec3};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{FieldSelector, Format, SampleArgs};
use crate::grid::{GridSpec, AXIS_NAMES};
use crate::output::{numeric_rows, Document, Metadata};
use crate::{kind_from, params_from, CliError};

/// Field component names, before in-plane projection.
fn components(field: FieldSelector) -> Vec<&'static str> {
    match field {
        FieldSelector::FL => vec!["f_re", "f_im"],
        FieldSelector::JMu => vec!["j0", "jx", "jy", "jz"],
        FieldSelector::VDirac | FieldSelector::VMaxwell => vec!["vx", "vy", "vz"],
        FieldSelector::RsVector => vec!["fx_re", "fx_im", "fy_re", "fy_im", "fz_re", "fz_im"],
        FieldSelector::ChargeProfile => vec!["j0"],
        FieldSelector::Upsilon => vec!["ud_re", "ud_im", "um_re", "um_im"],
    }
}

/// Indices of the spatial vector components (into [`components`]) and
/// the axis each belongs to.
fn vector_slots(field: FieldSelector) -> Option<[(usize, usize); 3]> {
    match field {
        FieldSelector::JMu => Some([(1, 0), (2, 1), (3, 2)]),
        FieldSelector::VDirac | FieldSelector::VMaxwell => Some([(0, 0), (1, 1), (2, 2)]),
        _ => None,
    }
}

fn hopf_pair(h: HopfValue) -> [f64; 2] {
    match h {
        HopfValue::Finite(z) => [z.re, z.im],
        HopfValue::Infinity => [f64::INFINITY, f64::INFINITY],
    }
}

pub fn evaluate(
    field: FieldSelector,
    kind: BispinorKind,
    p: &SpaceTimePoint,
    params: &PacketParams,
) -> hopfion::Result<Vec<f64>> {
    let vec3 = |v: Vec3| vec![v.x, v.y, v.z];
    Ok(match field {
        FieldSelector::FL => {
            let f = scalar_field(p, params)?;
            vec![f.re, f.im]
        }
        FieldSelector::JMu => {
            let j = four_current(kind, p, params)?;
            vec![j.j0, j.jx, j.jy, j.jz]
        }
        FieldSelector::VDirac => vec3(velocity_from_current(kind, p, params)?),
        FieldSelector::VMaxwell => vec3(velocity_maxwell(p, params.a)?),
        FieldSelector::RsVector => rs_vector(p, params.a, params.l)?
            .components()
            .iter()
            .flat_map(|c| [c.re, c.im])
            .collect(),
        FieldSelector::ChargeProfile => vec![four_current(kind, p, params)?.j0],
        FieldSelector::Upsilon => {
            let vd = source_field(TraceSource::VelocityDirac, p.spatial(), p.t, params)?;
            let vm = velocity_maxwell(p, params.a)?;
            let [a, b] = hopf_pair(hopf_map(&vd));
            let [c, d] = hopf_pair(hopf_map(&vm));
            vec![a, b, c, d]
        }
    })
}

pub struct Sampled {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub failures: usize,
    pub first_failure: Option<String>,
}

/// Evaluate `field` on every grid point; failed points become NaN rows.
pub fn sample_grid(
    field: FieldSelector,
    kind: BispinorKind,
    params: &PacketParams,
    grid: &GridSpec,
    all_components: bool,
) -> Sampled {
    let names = components(field);
    // keep indices of the emitted components
    let keep: Vec<usize> = match (vector_slots(field), grid.spatial_plane(), all_components) {
        (Some(slots), Some(plane), false) => (0..names.len())
            .filter(|i| slots.iter().all(|(slot, axis)| slot != i || plane.contains(axis)))
            .collect(),
        _ => (0..names.len()).collect(),
    };
    let mut columns = grid.column_names();
    columns.extend(keep.iter().map(|&i| names[i].to_string()));
    let results: Vec<(Vec<f64>, Option<String>)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let c = grid.point(k);
            let p = SpaceTimePoint::new(c[0], c[1], c[2], c[3]);
            let mut row = grid.active_coords(&c);
            match evaluate(field, kind, &p, params) {
                Ok(vals) => {
                    row.extend(keep.iter().map(|&i| vals[i]));
                    (row, None)
                }
                Err(e) => {
                    row.extend(keep.iter().map(|_| f64::NAN));
                    (row, Some(format!("({}, {}, {}, {}): {e}", c[0], c[1], c[2], c[3])))
                }
            }
        })
        .collect();
    let failures = results.iter().filter(|r| r.1.is_some()).count();
    let first_failure = results.iter().find_map(|r| r.1.clone());
    Sampled {
        columns,
        rows: results.into_iter().map(|r| r.0).collect(),
        failures,
        first_failure,
    }
}

pub fn run(args: &SampleArgs) -> Result<(), CliError> {
    let params = params_from(&args.common)?;
    let kind = kind_from(&args.common)?;
    let grid = GridSpec::parse(&args.grid)?;
    let s = sample_grid(args.field, kind, &params, &grid, args.all_components);
    let fixed: serde_json::Map<String, serde_json::Value> = AXIS_NAMES
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.active.iter().all(|a| a.axis != *i))
        .map(|(i, n)| (n.to_string(), json!(grid.fixed[i])))
        .collect();
    let settings = json!({
        "field": args.field.name(),
        "grid": grid,
        "fixed_coordinates": fixed,
        "row_order": "outer to inner in grid order",
        "in_plane_only": grid.spatial_plane().is_some() && !args.all_components,
    });
    let doc = Document {
        metadata: Metadata::new("sample", &args.common, &params, settings),
        summary: Some(json!({ "points": s.rows.len(), "failed_points": s.failures, "first_failure": s.first_failure })),
        columns: s.columns,
        rows: numeric_rows(s.rows),
    };
    doc.write(args.common.format_or(Format::Csv), args.common.out.as_deref())
}
