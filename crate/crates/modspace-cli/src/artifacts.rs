//! On-disk artifact formats: full-precision CSV and the JSON report and
//! manifest documents.

use crate::error::CliError;
use modspace::expr::TermClassification;
use modspace::manifold::CollapseReport;
use modspace::ode::{IntegratorConfig, Trajectory};
use modspace::phase::{ExtremumKind, SymmetryReport};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a CSV file of named float columns, all the same length.
pub fn write_csv(path: &Path, columns: &[(&str, &[f64])]) -> Result<(), CliError> {
    let n = columns.first().map(|(_, c)| c.len()).unwrap_or(0);
    debug_assert!(columns.iter().all(|(_, c)| c.len() == n));
    let mut out = String::new();
    let names: Vec<&str> = columns.iter().map(|(n, _)| *n).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for row in 0..n {
        for (i, (_, col)) in columns.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(col[row]));
        }
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Read a CSV of float columns produced by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::config(format!("{}: empty file", path.display())))?
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = 0;
        for (i, field) in line.split(',').enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::config(format!(
                    "{}:{}: `{field}` is not a number",
                    path.display(),
                    lineno + 2
                ))
            })?;
            columns
                .get_mut(i)
                .ok_or_else(|| {
                    CliError::config(format!("{}:{}: too many fields", path.display(), lineno + 2))
                })?
                .push(v);
            fields += 1;
        }
        if fields != header.len() {
            return Err(CliError::config(format!(
                "{}:{}: expected {} fields, found {fields}",
                path.display(),
                lineno + 2,
                header.len()
            )));
        }
    }
    Ok((header, columns))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::File::create(path)?.write_all(text.as_bytes())?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Reconstruct a trajectory from trajectory.csv columns (`time` first).
pub fn trajectory_from_columns(columns: &[Vec<f64>]) -> Result<Trajectory, CliError> {
    let times = columns
        .first()
        .ok_or_else(|| CliError::config("trajectory.csv has no columns"))?
        .clone();
    if times.len() < 2 {
        return Err(CliError::config("trajectory.csv holds fewer than 2 samples"));
    }
    let dim = columns.len() - 1;
    let states = (0..times.len())
        .map(|row| (0..dim).map(|d| columns[d + 1][row]).collect::<Vec<f64>>().into())
        .collect();
    Ok(Trajectory {
        dt: times[1] - times[0],
        times,
        states,
    })
}

#[derive(Serialize, Deserialize)]
pub struct PerturbationDoc {
    pub param: String,
    pub relative_change: f64,
}

#[derive(Serialize, Deserialize)]
pub struct SystemManifest {
    pub name: String,
    /// `builtin` or the definition file path.
    pub source: String,
    pub perturbation: Option<PerturbationDoc>,
    pub state_vars: Vec<String>,
    pub params: serde_json::Value,
    /// Full definition text with resolved parameters; `render` rebuilds the
    /// system from this, so a run directory is self-contained.
    pub definition: String,
}

#[derive(Serialize, Deserialize)]
pub struct ManifestDoc {
    pub tool_version: String,
    pub command: String,
    pub system: SystemManifest,
    pub integrator: IntegratorConfig,
    pub seed: u64,
    pub outputs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
pub struct ExtremumDoc {
    pub index: usize,
    pub kind: ExtremumKind,
    pub time: f64,
    pub phase: f64,
}

#[derive(Serialize, Deserialize)]
pub struct ThresholdsDoc {
    pub collapse_residual: f64,
    pub symmetric_score: f64,
    pub asymmetric_score: f64,
}

#[derive(Serialize, Deserialize)]
pub struct ReportDoc {
    pub tool_version: String,
    pub system: String,
    pub period: f64,
    pub classification: TermClassification,
    pub collapse: CollapseReport,
    pub symmetry: SymmetryReport,
    pub extrema: Vec<ExtremumDoc>,
    pub thresholds: ThresholdsDoc,
    /// The symmetry score and the collapse residual are this toolkit's
    /// quantitative operationalizations of qualitative geometric claims;
    /// these notes ride along in every report.
    pub notes: Vec<String>,
}
