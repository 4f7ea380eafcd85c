use serde::Serialize;

use crate::CliError;

pub const AXIS_NAMES: [&str; 4] = ["x", "y", "z", "t"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn value(&self, i: usize) -> f64 {
        // endpoints exact, interior by linear interpolation
        if i + 1 == self.count {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActiveAxis {
    /// Index into `x, y, z, t`.
    pub axis: usize,
    pub range: AxisRange,
}

/// Ranged axes in loop order (outer first) and fixed values for the rest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub active: Vec<ActiveAxis>,
    /// Coordinates for `x, y, z, t`; entries of active axes are ignored.
    pub fixed: [f64; 4],
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let mut active = Vec::new();
        let mut fixed = [0.0; 4];
        let mut seen = [false; 4];
        for entry in s.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (name, rhs) = entry
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("grid entry '{entry}' is not axis=value")))?;
            let axis = AXIS_NAMES
                .iter()
                .position(|a| *a == name.trim())
                .ok_or_else(|| CliError::Usage(format!("unknown grid axis '{name}'")))?;
            if seen[axis] {
                return Err(CliError::Usage(format!("grid axis '{name}' given twice")));
            }
            seen[axis] = true;
            let parts: Vec<&str> = rhs.split(':').collect();
            match parts.as_slice() {
                [v] => fixed[axis] = parse_f64(v)?,
                [lo, hi, n] => {
                    let range = AxisRange {
                        min: parse_f64(lo)?,
                        max: parse_f64(hi)?,
                        count: n
                            .trim()
                            .parse()
                            .map_err(|_| CliError::Usage(format!("bad grid count '{n}'")))?,
                    };
                    if range.count < 2 || range.min >= range.max {
                        return Err(CliError::Usage(format!(
                            "grid axis '{name}' needs min < max and count >= 2"
                        )));
                    }
                    active.push(ActiveAxis { axis, range });
                }
                _ => {
                    return Err(CliError::Usage(format!(
                        "grid entry '{entry}' is not value or min:max:count"
                    )))
                }
            }
        }
        if active.is_empty() {
            return Err(CliError::Usage("grid has no ranged axis".into()));
        }
        Ok(Self { active, fixed })
    }

    pub fn len(&self) -> usize {
        self.active.iter().map(|a| a.range.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column_names(&self) -> Vec<String> {
        self.active.iter().map(|a| AXIS_NAMES[a.axis].to_string()).collect()
    }

    /// Point `k` in row order, last active axis fastest.
    pub fn point(&self, mut k: usize) -> [f64; 4] {
        let mut out = self.fixed;
        for a in self.active.iter().rev() {
            out[a.axis] = a.range.value(k % a.range.count);
            k /= a.range.count;
        }
        out
    }

    pub fn active_coords(&self, p: &[f64; 4]) -> Vec<f64> {
        self.active.iter().map(|a| p[a.axis]).collect()
    }

    /// Spatial axes of a two-axis spatial slice.
    pub fn spatial_plane(&self) -> Option<[usize; 2]> {
        match self.active.as_slice() {
            [a, b] if a.axis < 3 && b.axis < 3 => Some([a.axis, b.axis]),
            _ => None,
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad number '{s}'")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("non-finite number '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plane() {
        let g = GridSpec::parse("x=-1:1:3, z=0:2:5, t=0.5").unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.column_names(), ["x", "z"]);
        assert_eq!(g.point(0), [-1.0, 0.0, 0.0, 0.5]);
        assert_eq!(g.point(1), [-1.0, 0.0, 0.5, 0.5]);
        assert_eq!(g.point(14), [1.0, 0.0, 2.0, 0.5]);
        assert_eq!(g.spatial_plane(), Some([0, 2]));
    }

    #[test]
    fn rejects_bad_specs() {
        for s in ["", "x=1", "x=1:0:3", "x=0:1:1", "w=0:1:3", "x=0:1:3,x=0", "x=a:1:3"] {
            assert!(GridSpec::parse(s).is_err(), "{s}");
        }
    }
}
