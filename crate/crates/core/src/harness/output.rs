//! Experiment directory layout: `config.echo`, one CSV per curve family, and
//! `selection.txt` for sweeps.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{lambda_label, CellSummary, Comparison, ExperimentConfig, LabeledCurve, SweepCell};
use crate::error::Result as CrateResult;
use crate::metrics::{format_sig6, write_curves_csv, AggregateCurve};

pub fn write_config_echo(dir: &Path, config: &ExperimentConfig) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("config.echo");
    fs::write(&path, config.to_toml())?;
    Ok(path)
}

fn write_labeled(path: &Path, curves: &[&LabeledCurve]) -> io::Result<()> {
    let labels: Vec<String> = curves.iter().map(|c| c.label.clone()).collect();
    let refs: Vec<&AggregateCurve> = curves.iter().map(|c| &c.curve).collect();
    let mut out = BufWriter::new(File::create(path)?);
    write_curves_csv(&mut out, &labels, &refs)?;
    out.flush()
}

/// One CSV per sparsity level, `sweep_K<k>.csv`, one column per λ.
pub fn write_sweep_csvs(dir: &Path, cells: &[SweepCell]) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut ks: Vec<usize> = cells.iter().map(|c| c.summary.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut paths = Vec::new();
    for k in ks {
        let row: Vec<&SweepCell> = cells.iter().filter(|c| c.summary.k == k).collect();
        let labels: Vec<String> = row.iter().map(|c| lambda_label(c.summary.lambda)).collect();
        let curves: Vec<&AggregateCurve> = row.iter().map(|c| &c.curve).collect();
        let path = dir.join(format!("sweep_K{k}.csv"));
        let mut out = BufWriter::new(File::create(&path)?);
        write_curves_csv(&mut out, &labels, &curves)?;
        out.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

/// Selected λ (or the infeasibility notice) followed by the per-cell table.
pub fn write_selection(
    dir: &Path,
    cells: &[SweepCell],
    selection: &CrateResult<f64>,
) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("selection.txt");
    let mut out = BufWriter::new(File::create(&path)?);
    match selection {
        Ok(lambda) => writeln!(out, "selected_lambda = {}", format_sig6(*lambda))?,
        Err(e) => writeln!(
            out,
            "selected_lambda = none ({})",
            e.to_string().lines().next().unwrap_or("")
        )?,
    }
    writeln!(out)?;
    writeln!(
        out,
        "lambda,K,steady_state_db,initial_db,final_db,stable,runs_used,diverged_runs"
    )?;
    for cell in cells {
        let CellSummary {
            lambda,
            k,
            steady_state,
            stable,
        } = cell.summary;
        writeln!(
            out,
            "{},{k},{},{},{},{stable},{},{}",
            format_sig6(lambda),
            format_sig6(steady_state),
            format_sig6(cell.curve.initial().unwrap_or(f64::NAN)),
            format_sig6(cell.curve.last().unwrap_or(f64::NAN)),
            cell.curve.runs_used,
            cell.curve.diverged_runs,
        )?;
    }
    out.flush()?;
    Ok(path)
}

/// `compare_T.csv` or `compare_K.csv` holding every labeled curve.
pub fn write_comparison(dir: &Path, comparison: &Comparison) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("compare_{}.csv", comparison.axis));
    let refs: Vec<&LabeledCurve> = comparison.curves.iter().collect();
    write_labeled(&path, &refs)?;
    Ok(path)
}

pub fn write_run(dir: &Path, curves: &[LabeledCurve]) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("run.csv");
    let refs: Vec<&LabeledCurve> = curves.iter().collect();
    write_labeled(&path, &refs)?;
    Ok(path)
}
