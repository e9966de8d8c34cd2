//! Core domain types: subjects, risks, survival curves and the pair-case taxonomy.
//!
//! Subject order is the alignment key everywhere in this crate: row `i` of a
//! [`RiskVector`] or [`SurvivalMatrix`] belongs to record `i` of the
//! [`SurvivalDataset`]. Joining by identifier is left to the I/O layer.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows of a survival matrix may increase by at most this much before they are rejected.
pub const MONOTONE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    pub id: String,
    pub time: f64,
    /// 1 = event observed, 0 = right-censored.
    pub event: u8,
}

impl SurvivalRecord {
    pub fn new(id: impl Into<String>, time: f64, event: u8) -> Self {
        Self {
            id: id.into(),
            time,
            event,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NegativeTime {
        index: usize,
        time: f64,
    },
    NonFiniteTime {
        index: usize,
    },
    NonBinaryEvent {
        index: usize,
        value: u8,
    },
    CovariateDimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    CovariateRowCount {
        expected: usize,
        found: usize,
    },
    NonFiniteCovariate {
        index: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeTime { index, time } => {
                write!(f, "negative time {time} at record {index}")
            }
            Violation::NonFiniteTime { index } => write!(f, "non-finite time at record {index}"),
            Violation::NonBinaryEvent { index, value } => {
                write!(f, "non-binary event indicator {value} at record {index}")
            }
            Violation::CovariateDimensionMismatch {
                index,
                expected,
                found,
            } => write!(
                f,
                "covariate dimension mismatch at record {index}: expected {expected}, found {found}"
            ),
            Violation::CovariateRowCount { expected, found } => write!(
                f,
                "covariate row count {found} does not match record count {expected}"
            ),
            Violation::NonFiniteCovariate { index } => {
                write!(f, "non-finite covariate at record {index}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lists every problem with a candidate dataset. The dataset is acceptable iff the report is empty.
pub fn validate_dataset(records: &[SurvivalRecord], covariates: Option<&[Vec<f64>]>) -> ValidationReport {
    let mut violations = Vec::new();
    for (index, r) in records.iter().enumerate() {
        if !r.time.is_finite() {
            violations.push(Violation::NonFiniteTime { index });
        } else if r.time < 0.0 {
            violations.push(Violation::NegativeTime { index, time: r.time });
        }
        if r.event > 1 {
            violations.push(Violation::NonBinaryEvent {
                index,
                value: r.event,
            });
        }
    }
    if let Some(cov) = covariates {
        if cov.len() != records.len() {
            violations.push(Violation::CovariateRowCount {
                expected: records.len(),
                found: cov.len(),
            });
        }
        if let Some(first) = cov.first() {
            let p = first.len();
            for (index, row) in cov.iter().enumerate() {
                if row.len() != p {
                    violations.push(Violation::CovariateDimensionMismatch {
                        index,
                        expected: p,
                        found: row.len(),
                    });
                }
                if row.iter().any(|x| !x.is_finite()) {
                    violations.push(Violation::NonFiniteCovariate { index });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Validated right-censored outcomes, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    ids: Vec<String>,
    times: Vec<f64>,
    events: Vec<bool>,
    covariates: Option<Vec<Vec<f64>>>,
}

impl SurvivalDataset {
    pub fn new(records: Vec<SurvivalRecord>, covariates: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let report = validate_dataset(&records, covariates.as_deref());
        if !report.is_empty() {
            return Err(Error::InvalidDataset(report));
        }
        let mut ids = Vec::with_capacity(records.len());
        let mut times = Vec::with_capacity(records.len());
        let mut events = Vec::with_capacity(records.len());
        for r in records {
            ids.push(r.id);
            times.push(r.time);
            events.push(r.event == 1);
        }
        Ok(Self {
            ids,
            times,
            events,
            covariates,
        })
    }

    /// Builds a dataset from parallel time/event slices, numbering subjects from 1.
    pub fn from_columns(times: &[f64], events: &[bool]) -> Result<Self> {
        if times.len() != events.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                found: events.len(),
            });
        }
        let records = times
            .iter()
            .zip(events)
            .enumerate()
            .map(|(k, (&t, &e))| SurvivalRecord::new((k + 1).to_string(), t, e as u8))
            .collect();
        Self::new(records, None)
    }

    pub fn with_covariates(self, covariates: Vec<Vec<f64>>) -> Result<Self> {
        let records = self.records();
        Self::new(records, Some(covariates))
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn covariates(&self) -> Option<&[Vec<f64>]> {
        self.covariates.as_deref()
    }

    pub fn records(&self) -> Vec<SurvivalRecord> {
        (0..self.len())
            .map(|i| SurvivalRecord::new(self.ids[i].clone(), self.times[i], self.events[i] as u8))
            .collect()
    }

    pub fn event_count(&self) -> usize {
        self.events.iter().filter(|&&e| e).count()
    }

    /// Largest uncensored time, if any subject had an event.
    pub fn max_event_time(&self) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.events)
            .filter(|(_, &e)| e)
            .map(|(&t, _)| t)
            .fold(None, |acc, t| Some(acc.map_or(t, |m: f64| m.max(t))))
    }

    /// Same dataset with every event indicator flipped (events become censorings).
    pub fn flipped(&self) -> Self {
        Self {
            ids: self.ids.clone(),
            times: self.times.clone(),
            events: self.events.iter().map(|e| !e).collect(),
            covariates: self.covariates.clone(),
        }
    }

    /// Rows picked by `indices`; repeats are allowed (bootstrap resampling).
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            times: indices.iter().map(|&i| self.times[i]).collect(),
            events: indices.iter().map(|&i| self.events[i]).collect(),
            covariates: self
                .covariates
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i].clone()).collect()),
        }
    }
}

/// One scalar risk per subject; higher means riskier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskVector(Vec<f64>);

impl RiskVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteRisk { index, value });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self(indices.iter().map(|&i| self.0[i]).collect())
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("grid points must be finite".into()));
        }
        if points[0] < 0.0 {
            return Err(Error::InvalidGrid("first grid point is negative".into()));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "grid is not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Self(points))
    }

    /// `start, start + step, ...` up to and including `end` (within rounding).
    pub fn regular(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(end >= start) {
            return Err(Error::InvalidGrid(format!(
                "bad regular grid {start}:{end}:{step}"
            )));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        Self::new((0..count).map(|k| start + k as f64 * step).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the last grid point `<= t`, clamped to the grid. The flag is true
    /// when `t` lies outside `[first, last]`.
    pub fn step_index(&self, t: f64) -> (usize, bool) {
        let k = self.0.partition_point(|&p| p <= t);
        if k == 0 {
            (0, true)
        } else {
            (k - 1, t > self.0[self.0.len() - 1])
        }
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(points: Vec<f64>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.0
    }
}

/// Per-subject survival curves `S(t | x_i)` over a shared grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalMatrix {
    grid: TimeGrid,
    probs: Vec<f64>,
    rows: usize,
}

impl SurvivalMatrix {
    /// Validates bounds and monotonicity. Increases up to [`MONOTONE_TOLERANCE`]
    /// are clamped away; anything larger is rejected.
    pub fn new(grid: TimeGrid, rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = grid.len();
        let mut probs = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} values, grid has {m}",
                    row.len()
                )));
            }
            let mut prev = f64::INFINITY;
            for (k, &v) in row.iter().enumerate() {
                if !v.is_finite() || !(-MONOTONE_TOLERANCE..=1.0 + MONOTONE_TOLERANCE).contains(&v) {
                    return Err(Error::InvalidMatrix(format!(
                        "row {i}, column {k}: value {v} outside [0, 1]"
                    )));
                }
                let mut v = v.clamp(0.0, 1.0);
                if v > prev {
                    if v - prev > MONOTONE_TOLERANCE {
                        return Err(Error::InvalidMatrix(format!(
                            "row {i} increases at column {k} ({prev} -> {v})"
                        )));
                    }
                    v = prev;
                }
                probs.push(v);
                prev = v;
            }
        }
        Ok(Self {
            grid,
            probs,
            rows: rows.len(),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.grid.len();
        &self.probs[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.grid.len())
    }

    pub fn values(&self) -> &[f64] {
        &self.probs
    }

    /// Step (previous-point) lookup of `S(t | x_i)`.
    pub fn at(&self, i: usize, t: f64) -> f64 {
        self.row(i)[self.grid.step_index(t).0]
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let m = self.grid.len();
        let mut probs = Vec::with_capacity(indices.len() * m);
        for &i in indices {
            probs.extend_from_slice(self.row(i));
        }
        Self {
            grid: self.grid.clone(),
            probs,
            rows: indices.len(),
        }
    }
}

/// How subject `i`'s prediction compares with subject `j`'s, in risk terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankRelation {
    /// `i` is predicted riskier than `j`.
    Greater,
    Less,
    Tied,
}

impl RankRelation {
    pub const ALL: [RankRelation; 3] = [RankRelation::Greater, RankRelation::Less, RankRelation::Tied];

    /// Compares scalar risks; `|mi - mj| <= tolerance` counts as a tie.
    pub fn of_risks(mi: f64, mj: f64, tolerance: f64) -> Self {
        if (mi - mj).abs() <= tolerance {
            RankRelation::Tied
        } else if mi > mj {
            RankRelation::Greater
        } else {
            RankRelation::Less
        }
    }

    /// Compares survival probabilities; lower survival means higher risk.
    pub fn of_survival(si: f64, sj: f64, tolerance: f64) -> Self {
        Self::of_risks(sj, si, tolerance)
    }
}

/// Ordered-pair taxonomy. Labels follow the published comparable/concordant
/// tables; `Later` covers every pair whose anchor has the larger time, which
/// no table counts because the mirrored pair carries the information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairCase {
    #[serde(rename = "1A")]
    Case1A,
    #[serde(rename = "1B")]
    Case1B,
    #[serde(rename = "1C")]
    Case1C,
    #[serde(rename = "2A")]
    Case2A,
    #[serde(rename = "2B")]
    Case2B,
    #[serde(rename = "2C")]
    Case2C,
    #[serde(rename = "3")]
    Case3,
    #[serde(rename = "4")]
    Case4,
    #[serde(rename = "5A")]
    Case5A,
    #[serde(rename = "5B")]
    Case5B,
    #[serde(rename = "5C")]
    Case5C,
    #[serde(rename = "6A")]
    Case6A,
    #[serde(rename = "6B")]
    Case6B,
    #[serde(rename = "6C")]
    Case6C,
    #[serde(rename = "7A")]
    Case7A,
    #[serde(rename = "7B")]
    Case7B,
    #[serde(rename = "7C")]
    Case7C,
    #[serde(rename = "8")]
    Case8,
    #[serde(rename = "later")]
    Later,
}

impl PairCase {
    pub const COUNT: usize = 19;

    pub const ALL: [PairCase; PairCase::COUNT] = [
        PairCase::Case1A,
        PairCase::Case1B,
        PairCase::Case1C,
        PairCase::Case2A,
        PairCase::Case2B,
        PairCase::Case2C,
        PairCase::Case3,
        PairCase::Case4,
        PairCase::Case5A,
        PairCase::Case5B,
        PairCase::Case5C,
        PairCase::Case6A,
        PairCase::Case6B,
        PairCase::Case6C,
        PairCase::Case7A,
        PairCase::Case7B,
        PairCase::Case7C,
        PairCase::Case8,
        PairCase::Later,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            PairCase::Case1A => "1A",
            PairCase::Case1B => "1B",
            PairCase::Case1C => "1C",
            PairCase::Case2A => "2A",
            PairCase::Case2B => "2B",
            PairCase::Case2C => "2C",
            PairCase::Case3 => "3",
            PairCase::Case4 => "4",
            PairCase::Case5A => "5A",
            PairCase::Case5B => "5B",
            PairCase::Case5C => "5C",
            PairCase::Case6A => "6A",
            PairCase::Case6B => "6B",
            PairCase::Case6C => "6C",
            PairCase::Case7A => "7A",
            PairCase::Case7B => "7B",
            PairCase::Case7C => "7C",
            PairCase::Case8 => "8",
            PairCase::Later => "later",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.label() == label)
    }
}

impl fmt::Display for PairCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn classify_pair(ti: f64, di: bool, tj: f64, dj: bool, rel: RankRelation) -> PairCase {
    use PairCase::*;
    let by_rank = |a, b, c| match rel {
        RankRelation::Greater => a,
        RankRelation::Less => b,
        RankRelation::Tied => c,
    };
    if ti < tj {
        match (di, dj) {
            (true, true) => by_rank(Case1A, Case1B, Case1C),
            (true, false) => by_rank(Case2A, Case2B, Case2C),
            (false, true) => Case3,
            (false, false) => Case4,
        }
    } else if ti == tj {
        match (di, dj) {
            (true, true) => by_rank(Case5A, Case5B, Case5C),
            (true, false) => by_rank(Case6A, Case6B, Case6C),
            (false, true) => by_rank(Case7A, Case7B, Case7C),
            (false, false) => Case8,
        }
    } else {
        Later
    }
}
