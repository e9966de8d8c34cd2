//! Stratified cross-validation splits and percentile bootstrap intervals.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits subjects into `k` folds, dealing events and censored subjects
/// separately so each fold keeps roughly the overall event rate.
///
/// A stratum may be empty, but a nonempty stratum needs at least `k` members.
pub fn stratified_kfold(events: &[bool], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k}, need at least 2 folds")));
    }
    let mut fold_of = vec![0usize; events.len()];
    let mut offset = 0;
    for (s, (name, want)) in [("events", true), ("censored", false)].into_iter().enumerate() {
        let mut members: Vec<usize> = (0..events.len()).filter(|&i| events[i] == want).collect();
        if !members.is_empty() && members.len() < k {
            return Err(Error::StratumTooSmall {
                stratum: name,
                size: members.len(),
                k,
            });
        }
        members.shuffle(&mut stream(seed, Purpose::Folds, [k as u64, 0], s as u64));
        for (pos, &i) in members.iter().enumerate() {
            fold_of[i] = (pos + offset) % k;
        }
        // start the second stratum where the first left off so fold sizes stay balanced
        offset = members.len() % k;
    }
    Ok((0..k)
        .map(|f| {
            let (test, train) = (0..events.len()).partition(|&i| fold_of[i] == f);
            Fold { train, test }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub replicates: usize,
    /// Subjects per resample; `None` uses the size of the index set.
    pub sample_size: Option<usize>,
    pub level: f64,
}

impl BootstrapSpec {
    /// 100 resamples of 1000 subjects at 95%.
    pub const fn standard() -> Self {
        Self {
            replicates: 100,
            sample_size: Some(1000),
            level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    /// One entry per replicate in replicate order; `None` where the estimator failed.
    pub samples: Vec<Option<f64>>,
    pub failed: usize,
}

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending and nonempty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap over resamples of `indices` drawn with replacement.
/// Replicate `r` uses its own random stream, so results do not depend on
/// scheduling. Failed evaluations are excluded and counted.
pub fn bootstrap_ci<F, E>(
    indices: &[usize],
    estimator: F,
    spec: BootstrapSpec,
    seed: u64,
) -> Result<BootstrapResult>
where
    F: Fn(&[usize]) -> std::result::Result<f64, E> + Sync,
{
    if spec.replicates == 0 {
        return Err(Error::InvalidParameter(
            "bootstrap needs at least one replicate".into(),
        ));
    }
    if !(spec.level > 0.0 && spec.level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level {} must lie in (0, 1)",
            spec.level
        )));
    }
    if indices.is_empty() {
        return Err(Error::NoRecords);
    }
    let size = spec.sample_size.unwrap_or(indices.len());
    let samples: Vec<Option<f64>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, Purpose::Bootstrap, [size as u64, 0], r as u64);
            let draw: Vec<usize> = (0..size)
                .map(|_| indices[rng.gen_range(0..indices.len())])
                .collect();
            estimator(&draw).ok().filter(|v| v.is_finite())
        })
        .collect();
    let mut ok: Vec<f64> = samples.iter().flatten().copied().collect();
    if ok.is_empty() {
        return Err(Error::AllResamplesFailed(spec.replicates));
    }
    ok.sort_by(f64::total_cmp);
    let alpha = 1.0 - spec.level;
    Ok(BootstrapResult {
        lo: quantile(&ok, alpha / 2.0),
        hi: quantile(&ok, 1.0 - alpha / 2.0),
        level: spec.level,
        failed: spec.replicates - ok.len(),
        samples,
    })
}
