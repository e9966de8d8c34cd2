//! CSV readers and writers for subjects, survival matrices and covariates.
//!
//! Subjects: header `id,time,event[,<risk>][,cov_1..cov_p]`.
//! Matrix: header `id,<t_1>,<t_2>,...`, rows in the same order as the subjects.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use cindex_core::data::{SurvivalDataset, SurvivalMatrix, SurvivalRecord, TimeGrid, Violation};

pub struct Subjects {
    pub dataset: SurvivalDataset,
    pub risks: Option<Vec<f64>>,
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))
}

fn number(field: &str, line: u64, column: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| anyhow!("line {line}: column {column}: '{field}' is not a number"))?;
    if !v.is_finite() {
        bail!("line {line}: column {column}: value must be finite");
    }
    Ok(v)
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

pub fn read_subjects(path: &Path, risk_col: &str) -> Result<Subjects> {
    let mut rdr = reader(path)?;
    let header = rdr
        .headers()
        .with_context(|| format!("{}: line 1: unreadable header", path.display()))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 3 || names[..3] != ["id", "time", "event"] {
        bail!("{}: line 1: header must start with id,time,event", path.display());
    }
    let mut risk_idx = None;
    let mut cov_idx = Vec::new();
    for (k, &name) in names.iter().enumerate().skip(3) {
        if name == risk_col && risk_idx.is_none() {
            risk_idx = Some(k);
        } else if name.starts_with("cov_") {
            cov_idx.push(k);
        } else {
            bail!("{}: line 1: unexpected column '{name}'", path.display());
        }
    }

    let mut records = Vec::new();
    let mut risks = Vec::new();
    let mut covariates = Vec::new();
    let mut lines = Vec::new();
    let mut parse_rows = || -> Result<()> {
        for rec in rdr.records() {
            let rec = rec?;
            let line = record_line(&rec);
            let time = number(&rec[1], line, "time")?;
            let event = match &rec[2] {
                "0" => 0,
                "1" => 1,
                other => bail!("line {line}: event must be 0 or 1, found '{other}'"),
            };
            records.push(SurvivalRecord::new(&rec[0], time, event));
            if let Some(k) = risk_idx {
                risks.push(number(&rec[k], line, risk_col)?);
            }
            if !cov_idx.is_empty() {
                covariates.push(
                    cov_idx
                        .iter()
                        .map(|&k| number(&rec[k], line, names[k]))
                        .collect::<Result<Vec<f64>>>()?,
                );
            }
            lines.push(line);
        }
        Ok(())
    };
    parse_rows().with_context(|| path.display().to_string())?;
    let covariates = (!cov_idx.is_empty()).then_some(covariates);
    let dataset = SurvivalDataset::new(records, covariates).map_err(|e| match e {
        cindex_core::Error::InvalidDataset(report) => {
            let first = report
                .violations
                .first()
                .map(|v| (violation_index(v), v.to_string()));
            match first {
                Some((Some(i), msg)) => anyhow!("{}: line {}: {msg}", path.display(), lines[i]),
                Some((None, msg)) => anyhow!("{}: {msg}", path.display()),
                None => anyhow!("{}: invalid dataset", path.display()),
            }
        }
        other => anyhow!("{}: {other}", path.display()),
    })?;
    Ok(Subjects {
        dataset,
        risks: risk_idx.map(|_| risks),
    })
}

fn violation_index(v: &Violation) -> Option<usize> {
    match *v {
        Violation::NegativeTime { index, .. }
        | Violation::NonFiniteTime { index }
        | Violation::NonBinaryEvent { index, .. }
        | Violation::CovariateDimensionMismatch { index, .. }
        | Violation::NonFiniteCovariate { index } => Some(index),
        Violation::CovariateRowCount { .. } => None,
    }
}

pub fn read_matrix(path: &Path, ids: &[String]) -> Result<SurvivalMatrix> {
    let mut rdr = reader(path)?;
    let header = rdr
        .headers()
        .with_context(|| format!("{}: line 1: unreadable header", path.display()))?
        .clone();
    if header.get(0) != Some("id") {
        bail!("{}: line 1: first column must be id", path.display());
    }
    let grid = header
        .iter()
        .skip(1)
        .map(|h| number(h, 1, "header"))
        .collect::<Result<Vec<f64>>>()
        .with_context(|| format!("{}: grid times", path.display()))?;
    let grid = TimeGrid::new(grid).map_err(|e| anyhow!("{}: line 1: {e}", path.display()))?;

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| anyhow!("{}: {e}", path.display()))?;
        let line = record_line(&rec);
        let k = rows.len();
        match ids.get(k) {
            Some(id) if id == &rec[0] => {}
            Some(id) => bail!(
                "{}: line {line}: id '{}' does not match subject '{id}' in the same position",
                path.display(),
                &rec[0]
            ),
            None => bail!("{}: line {line}: more rows than subjects", path.display()),
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|v| number(v, line, "survival"))
            .collect::<Result<Vec<f64>>>()
            .with_context(|| path.display().to_string())?;
        rows.push(row);
    }
    if rows.len() != ids.len() {
        bail!(
            "{}: {} rows for {} subjects",
            path.display(),
            rows.len(),
            ids.len()
        );
    }
    SurvivalMatrix::new(grid, rows).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Numeric covariate table with a header. A leading `id` column is ignored.
pub fn read_covariates(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = reader(path)?;
    let header = rdr.headers()?.clone();
    let skip = usize::from(header.get(0) == Some("id"));
    let names: Vec<String> = header.iter().map(String::from).collect();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| anyhow!("{}: {e}", path.display()))?;
        let line = record_line(&rec);
        out.push(
            rec.iter()
                .enumerate()
                .skip(skip)
                .map(|(k, v)| number(v, line, &names[k]))
                .collect::<Result<Vec<f64>>>()
                .with_context(|| path.display().to_string())?,
        );
    }
    if out.is_empty() {
        bail!("{}: no records", path.display());
    }
    Ok(out)
}

/// Writes subjects in the input schema; `risks` goes in a `risk` column.
pub fn write_subjects(
    path: &Path,
    ds: &SurvivalDataset,
    risks: Option<&[f64]>,
    covariates: Option<&[Vec<f64>]>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    let p = covariates.and_then(|c| c.first()).map_or(0, Vec::len);
    let mut header = vec!["id".to_string(), "time".into(), "event".into()];
    if risks.is_some() {
        header.push("risk".into());
    }
    header.extend((1..=p).map(|k| format!("cov_{k}")));
    w.write_record(&header)?;
    for i in 0..ds.len() {
        let mut row = vec![
            ds.ids()[i].clone(),
            ds.times()[i].to_string(),
            u8::from(ds.events()[i]).to_string(),
        ];
        if let Some(r) = risks {
            row.push(r[i].to_string());
        }
        if let Some(c) = covariates {
            row.extend(c[i].iter().map(f64::to_string));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write to stdout"),
    }
}
