//! Normalized squared deviation per run and its Monte Carlo average in dB.

use std::io::{self, Write};

use crate::error::{check_len, Error, Result};

/// Floor applied when the averaged deviation is exactly zero.
pub const DB_FLOOR: f64 = -300.0;

/// Default share of the curve treated as steady state.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;

/// Per-iteration `‖w(n) - w‖² / ‖w‖²` for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MseTrace {
    pub values: Vec<f64>,
    /// Set when the run produced a non-finite estimate. Values after that
    /// point repeat the last finite deviation.
    pub diverged: bool,
}

impl MseTrace {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            diverged: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub mse_db: Vec<f64>,
    pub runs_used: usize,
    pub diverged_runs: usize,
}

impl AggregateCurve {
    pub fn len(&self) -> usize {
        self.mse_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mse_db.is_empty()
    }

    pub fn initial(&self) -> Option<f64> {
        self.mse_db.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.mse_db.last().copied()
    }
}

pub fn run_deviation(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    check_len(truth.len(), estimate.len())?;
    let energy: f64 = truth.iter().map(|w| w * w).sum();
    if !(energy > 0.0) {
        return Err(Error::param("truth", "reference channel has zero norm"));
    }
    let dist: f64 = estimate
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(dist / energy)
}

/// `10 log10(x)` clamped below at [`DB_FLOOR`].
pub fn to_db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(DB_FLOOR)
    } else if x == 0.0 {
        DB_FLOOR
    } else {
        f64::NAN
    }
}

/// Averages runs per iteration, then converts to dB.
///
/// Each iteration's values are summed in sorted order, so the result does not
/// depend on the order of `traces`. With `exclude_diverged`, diverged traces
/// are left out of the mean and only counted.
pub fn aggregate(traces: &[MseTrace], exclude_diverged: bool) -> Result<AggregateCurve> {
    let first = traces.first().ok_or(Error::Empty("trace list"))?;
    let len = first.len();
    for trace in traces {
        check_len(len, trace.len())?;
    }
    let diverged_runs = traces.iter().filter(|t| t.diverged).count();
    let used: Vec<&MseTrace> = traces
        .iter()
        .filter(|t| !(exclude_diverged && t.diverged))
        .collect();
    if used.is_empty() {
        return Err(Error::Empty("non-diverged trace list"));
    }

    let m = used.len() as f64;
    let mut column = Vec::with_capacity(used.len());
    let mse_db = (0..len)
        .map(|n| {
            column.clear();
            column.extend(used.iter().map(|t| t.values[n]));
            column.sort_unstable_by(f64::total_cmp);
            to_db(column.iter().sum::<f64>() / m)
        })
        .collect();

    Ok(AggregateCurve {
        mse_db,
        runs_used: used.len(),
        diverged_runs,
    })
}

/// Mean of the last `ceil(tail_fraction * len)` points of the dB curve.
pub fn steady_state(curve: &AggregateCurve, tail_fraction: f64) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::Empty("curve"));
    }
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::param(
            "tail_fraction",
            format!("must lie in (0, 1), got {tail_fraction}"),
        ));
    }
    let len = curve.len();
    let tail = ((tail_fraction * len as f64).ceil() as usize).clamp(1, len);
    let sum: f64 = curve.mse_db[len - tail..].iter().sum();
    Ok(sum / tail as f64)
}

/// Formats with 6 significant digits, like C's `%.6g`.
pub fn format_sig6(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes `iteration,<label...>` followed by one row per iteration.
pub fn write_curves_csv<W: Write>(
    mut out: W,
    labels: &[String],
    curves: &[&AggregateCurve],
) -> io::Result<()> {
    assert_eq!(labels.len(), curves.len(), "one label per curve");
    let len = curves.first().map_or(0, |c| c.len());
    write!(out, "iteration")?;
    for label in labels {
        write!(out, ",{label}")?;
    }
    writeln!(out)?;
    for n in 0..len {
        write!(out, "{n}")?;
        for curve in curves {
            write!(out, ",{}", format_sig6(curve.mse_db[n]))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
