//! Central finite differences refined by Richardson extrapolation.
//!
//! The step is halved at each level; since central differences have an
//! error series in even powers of the step, column `j` of the tableau
//! removes the `h^{2j}` term. The error estimate is the one used by Ridders'
//! method: the larger of the two neighbouring tableau differences.

use num_complex::Complex64;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonConfig {
    pub initial_step: f64,
    pub levels: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Restarts from a halved initial step while the tableau has not settled.
    pub restarts: usize,
}

impl Default for RichardsonConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            levels: 8,
            rel_tol: 1e-8,
            abs_tol: 1e-300,
            restarts: 3,
        }
    }
}

impl RichardsonConfig {
    pub fn with_step(mut self, step: f64) -> Self {
        self.initial_step = step;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: Complex64,
    pub error_estimate: f64,
    /// False when the tableau never settled below the configured tolerance.
    pub within_tolerance: bool,
}

/// Derivative of a scalar complex function of one real variable.
pub fn richardson_derivative<F>(f: F, x0: f64, order: DerivativeOrder, cfg: &RichardsonConfig) -> Derivative
where
    F: Fn(f64) -> Complex64,
{
    let d = richardson_vector(|x| Ok(vec![f(x)]), x0, order, cfg).expect("infallible closure");
    d[0]
}

/// Component-wise derivative of a vector-valued function; every component
/// shares the same function evaluations.
///
/// A tableau that has not settled, judged against the largest component,
/// is restarted from half the step; each component keeps its smallest
/// error estimate over all attempts.
pub fn richardson_vector<F>(f: F, x0: f64, order: DerivativeOrder, cfg: &RichardsonConfig) -> Result<Vec<Derivative>>
where
    F: Fn(f64) -> Result<Vec<Complex64>>,
{
    let mut attempt = *cfg;
    let mut best = tableau(&f, x0, order, &attempt)?;
    for _ in 0..cfg.restarts {
        let scale = best.iter().map(|d| d.value.norm()).fold(0.0, f64::max);
        if best
            .iter()
            .all(|d| d.error_estimate <= cfg.rel_tol * scale + cfg.abs_tol)
        {
            break;
        }
        attempt.initial_step *= 0.5;
        let next = tableau(&f, x0, order, &attempt)?;
        for (b, n) in best.iter_mut().zip(next) {
            if n.error_estimate < b.error_estimate {
                *b = n;
            }
        }
    }
    Ok(best)
}

fn tableau<F>(f: &F, x0: f64, order: DerivativeOrder, cfg: &RichardsonConfig) -> Result<Vec<Derivative>>
where
    F: Fn(f64) -> Result<Vec<Complex64>>,
{
    let levels = cfg.levels.max(2);
    let center = match order {
        DerivativeOrder::First => None,
        DerivativeOrder::Second => Some(f(x0)?),
    };

    let difference = |h: f64| -> Result<Vec<Complex64>> {
        let plus = f(x0 + h)?;
        let minus = f(x0 - h)?;
        Ok(match order {
            DerivativeOrder::First => plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect(),
            DerivativeOrder::Second => {
                let c = center.as_ref().expect("center evaluated for second order");
                plus.iter()
                    .zip(&minus)
                    .zip(c)
                    .map(|((p, m), c0)| (p - 2.0 * c0 + m) / (h * h))
                    .collect()
            }
        })
    };

    let first = difference(cfg.initial_step)?;
    let n = first.len();
    let mut best: Vec<Derivative> = first
        .iter()
        .map(|&v| Derivative {
            value: v,
            error_estimate: f64::INFINITY,
            within_tolerance: false,
        })
        .collect();
    let mut done = vec![false; n];
    // prev[c][j] holds column j of the previous tableau row for component c
    let mut prev: Vec<Vec<Complex64>> = first.iter().map(|&v| vec![v]).collect();
    let mut h = cfg.initial_step;

    for _ in 1..levels {
        h *= 0.5;
        let row0 = difference(h)?;
        for c in 0..n {
            let mut row = Vec::with_capacity(prev[c].len() + 1);
            row.push(row0[c]);
            let mut factor = 1.0;
            for j in 1..=prev[c].len() {
                factor *= 4.0;
                let next = row[j - 1] + (row[j - 1] - prev[c][j - 1]) / (factor - 1.0);
                if !done[c] {
                    let err = (next - row[j - 1]).norm().max((next - prev[c][j - 1]).norm());
                    if err <= best[c].error_estimate {
                        best[c].error_estimate = err;
                        best[c].value = next;
                    }
                }
                row.push(next);
            }
            let k = row.len() - 1;
            if !done[c] && (row[k] - prev[c][k - 1]).norm() >= 2.0 * best[c].error_estimate {
                done[c] = true;
            }
            prev[c] = row;
        }
        if done.iter().all(|&d| d) {
            break;
        }
    }
    for d in best.iter_mut() {
        d.within_tolerance = d.error_estimate <= cfg.rel_tol * d.value.norm() + cfg.abs_tol;
    }
    Ok(best)
}
