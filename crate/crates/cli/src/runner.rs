//! `predict`, `sweep` and `spectrum`. Every file is written once, at the end,
//! from results that depend only on the config.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use szego_core::pipeline::Row;
use szego_core::quantize::spectrum_csv;
use szego_core::szego::{fit_and_compare, A1Options, AsymptoticsReport, Coefficients};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Fixed column order of the sweep table.
pub const SWEEP_COLUMNS: &str =
    "r,measured,predicted,residual,residual_over_r,identity_defect,edge_leakage,basis_tail";

#[derive(Debug, Serialize)]
struct Prediction {
    r: f64,
    predicted: f64,
}

#[derive(Debug, Serialize)]
struct PredictOutput {
    a0: f64,
    a1: f64,
    truncation: f64,
    predictions: Vec<Prediction>,
}

#[derive(Debug, Serialize)]
struct Failure {
    r: f64,
    error: String,
}

#[derive(Debug, Serialize)]
struct SweepOutput {
    coefficients: Coefficients,
    rows: Vec<Row>,
    failures: Vec<Failure>,
    fit: Option<AsymptoticsReport>,
    fit_error: Option<String>,
}

fn write(dir: &Path, name: String, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    written.push(path);
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output is serialisable") + "\n"
}

pub fn run_predict(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let exp = cfg.experiment()?;
    let c = exp.coefficients(&A1Options::default())?;
    let predictions: Vec<Prediction> = cfg
        .r_list
        .iter()
        .map(|&r| Prediction { r, predicted: c.predict(r) })
        .collect();
    let mut csv = String::from("r,predicted\n");
    for p in &predictions {
        let _ = writeln!(csv, "{:.16e},{:.16e}", p.r, p.predicted);
    }
    let output = PredictOutput {
        a0: c.a0,
        a1: c.a1,
        truncation: c.truncation,
        predictions,
    };
    let mut written = Vec::new();
    write(out, format!("{}_predict.json", cfg.prefix()), &to_json(&output), &mut written)?;
    write(out, format!("{}_predict.csv", cfg.prefix()), &csv, &mut written)?;
    Ok(written)
}

/// Measures every r in parallel; failed r values are recorded and skipped.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let exp = cfg.experiment()?;
    let c = exp.coefficients(&A1Options::default())?;
    let results: Vec<(f64, szego_core::Result<Row>)> = cfg.r_list.par_iter().map(|&r| (r, exp.measure(r))).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in results {
        match res {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(Failure { r, error: e.to_string() }),
        }
    }
    if rows.is_empty() {
        let detail: Vec<String> = failures.iter().map(|f| format!("r = {}: {}", f.r, f.error)).collect();
        return Err(CliError::Failed(format!("every r failed: {}", detail.join("; "))));
    }
    let rs: Vec<f64> = rows.iter().map(|row| row.r).collect();
    let measured: Vec<f64> = rows.iter().map(|row| row.measured).collect();
    let (fit, fit_error) = match fit_and_compare(&rs, &measured, c) {
        Ok(report) => (Some(report), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut csv = format!("{SWEEP_COLUMNS}\n");
    for row in &rows {
        let predicted = c.predict(row.r);
        let residual = row.measured - predicted;
        let _ = writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.r,
            row.measured,
            predicted,
            residual,
            residual / row.r,
            row.identity_defect,
            row.edge_leakage,
            row.basis_tail
        );
    }
    let output = SweepOutput {
        coefficients: c,
        rows,
        failures,
        fit,
        fit_error,
    };
    let mut written = Vec::new();
    write(out, format!("{}_sweep.json", cfg.prefix()), &to_json(&output), &mut written)?;
    write(out, format!("{}_sweep.csv", cfg.prefix()), &csv, &mut written)?;
    Ok(written)
}

pub fn run_spectrum(cfg: &ExperimentConfig, r: Option<f64>, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let r = r.unwrap_or(cfg.r_list[0]);
    if !(r.is_finite() && r > 0.0) {
        return Err(CliError::Validation(format!("--r must be positive, got {r}")));
    }
    let exp = cfg.experiment()?;
    let spectrum = exp.spectrum(r)?;
    let mut written = Vec::new();
    write(out, format!("{}_spectrum.csv", cfg.prefix()), &spectrum_csv(&spectrum.eigenvalues), &mut written)?;
    write(out, format!("{}_spectrum.json", cfg.prefix()), &to_json(&spectrum.row), &mut written)?;
    Ok(written)
}
