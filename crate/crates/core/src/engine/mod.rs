//! The generalized pairwise concordance estimator.
//!
//! Every estimator in this crate runs through [`concordance_with`]: ordered
//! pairs `(i, j)` are classified into a [`PairCase`], filtered by truncation
//! on the anchor time `T_i`, and accumulated with the anchor's weight
//! according to the policy's case table.
//!
//! Work is split by anchor subject. Each anchor produces its own partial
//! tally and partial tallies are summed in subject order, so results are
//! bit-identical for any thread count.

mod decompose;
mod oracle;
mod policy;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{classify_pair, PairCase, RankRelation, RiskVector, SurvivalDataset, SurvivalMatrix};
use crate::error::{Error, Result};
use crate::km::{anchor_weight, km_fit, KmTarget, StepFunction};

pub use decompose::{decompose, BlockTerms, DecompositionReport};
pub use oracle::{brute_force_oracle, ORACLE_MAX_SUBJECTS};
pub use policy::{CaseRule, ConcordancePolicy, FinalFold, GSource, Truncation, WeightScheme};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseTally {
    /// Ordered pairs classified into this case (after truncation), whatever the policy says.
    pub pairs: u64,
    /// Weighted comparable sum.
    pub comparable: f64,
    /// Weighted concordance credit.
    pub concordant: f64,
}

impl CaseTally {
    fn add(&mut self, other: &CaseTally) {
        self.pairs += other.pairs;
        self.comparable += other.comparable;
        self.concordant += other.concordant;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTally {
    pub cases: BTreeMap<PairCase, CaseTally>,
    pub numerator: f64,
    pub denominator: f64,
    /// Comparable pairs skipped because the anchor's IPCW weight was undefined.
    pub dropped_pairs: u64,
    /// Anchor subjects whose time fell outside the survival grid (time-dependent estimator only).
    pub beyond_grid: u64,
    /// Truncation point actually used; `None` when no truncation applied.
    pub tau: Option<f64>,
    pub weight_scheme: WeightScheme,
}

impl PairTally {
    pub fn case(&self, case: PairCase) -> CaseTally {
        self.cases.get(&case).copied().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concordance {
    pub estimate: f64,
    pub tally: PairTally,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntoliniVariant {
    Antolini,
    AdjAntolini,
}

impl AntoliniVariant {
    pub fn policy(self) -> ConcordancePolicy {
        crate::profiles::pycox_policy(self)
    }
}

/// Concordance of scalar risks under `policy`. `g` is only consulted when the
/// policy asks for a provided censoring distribution.
pub fn concordance(
    ds: &SurvivalDataset,
    risks: &RiskVector,
    policy: &ConcordancePolicy,
    g: Option<&StepFunction>,
) -> Result<Concordance> {
    check_len(ds.len(), risks.len())?;
    let m = risks.values();
    let tol = policy.tie_tolerance;
    concordance_with(ds, policy, g, 0, |i, j| RankRelation::of_risks(m[i], m[j], tol))
}

/// Time-dependent concordance: pair `(i, j)` is ranked by `S(T_i | x_i)` against
/// `S(T_i | x_j)`, both read off the grid by previous-point lookup.
pub fn concordance_td(
    ds: &SurvivalDataset,
    sm: &SurvivalMatrix,
    variant: AntoliniVariant,
) -> Result<Concordance> {
    concordance_td_with_policy(ds, sm, &variant.policy(), None)
}

pub fn concordance_td_with_policy(
    ds: &SurvivalDataset,
    sm: &SurvivalMatrix,
    policy: &ConcordancePolicy,
    g: Option<&StepFunction>,
) -> Result<Concordance> {
    check_len(ds.len(), sm.n_rows())?;
    let lookups: Vec<(usize, bool)> = ds.times().iter().map(|&t| sm.grid().step_index(t)).collect();
    let beyond = lookups.iter().filter(|(_, out)| *out).count() as u64;
    let tol = policy.tie_tolerance;
    let m = sm.grid().len();
    let probs = sm.values();
    concordance_with(ds, policy, g, beyond, |i, j| {
        let k = lookups[i].0;
        RankRelation::of_survival(probs[i * m + k], probs[j * m + k], tol)
    })
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// Truncation point for `policy` on `ds`. `Ok(None)` means no truncation.
pub fn resolve_tau(ds: &SurvivalDataset, truncation: Truncation) -> Option<f64> {
    match truncation {
        Truncation::None => None,
        Truncation::Value(tau) => Some(tau),
        // no events: every anchor fails T_i < tau
        Truncation::MaxUncensored => Some(ds.max_event_time().unwrap_or(f64::NEG_INFINITY)),
    }
}

pub(crate) fn anchor_weights(
    ds: &SurvivalDataset,
    policy: &ConcordancePolicy,
    g: Option<&StepFunction>,
) -> Result<Vec<Option<f64>>> {
    if policy.weight_scheme == WeightScheme::Uniform {
        return Ok(vec![Some(1.0); ds.len()]);
    }
    let fitted;
    let g = match policy.g_source {
        GSource::Provided => g.ok_or(Error::MissingCensoringDistribution)?,
        GSource::TestSet => {
            fitted = km_fit(ds, KmTarget::Censoring)?;
            &fitted
        }
    };
    Ok(ds
        .times()
        .iter()
        .map(|&t| anchor_weight(g, t, policy.weight_scheme))
        .collect())
}

struct AnchorTally {
    cases: [CaseTally; PairCase::COUNT],
    dropped: u64,
}

pub(crate) fn concordance_with<F>(
    ds: &SurvivalDataset,
    policy: &ConcordancePolicy,
    g: Option<&StepFunction>,
    beyond_grid: u64,
    rank: F,
) -> Result<Concordance>
where
    F: Fn(usize, usize) -> RankRelation + Sync,
{
    policy.validate()?;
    let tau = resolve_tau(ds, policy.truncation);
    let weights = anchor_weights(ds, policy, g)?;
    let table = policy.dense_table();
    let times = ds.times();
    let events = ds.events();
    let n = ds.len();

    let partials: Vec<AnchorTally> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = AnchorTally {
                cases: [CaseTally::default(); PairCase::COUNT],
                dropped: 0,
            };
            let ti = times[i];
            if tau.is_some_and(|tau| !(ti < tau)) {
                return acc;
            }
            for j in 0..n {
                if j == i || times[j] < ti {
                    continue;
                }
                let case = classify_pair(ti, events[i], times[j], events[j], rank(i, j));
                let slot = &mut acc.cases[case.index()];
                slot.pairs += 1;
                let Some(rule) = table[case.index()] else {
                    continue;
                };
                match weights[i] {
                    Some(w) => {
                        let cw = w * rule.comparable_weight;
                        slot.comparable += cw;
                        slot.concordant += cw * rule.credit;
                    }
                    None => acc.dropped += 1,
                }
            }
            acc
        })
        .collect();

    let mut totals = [CaseTally::default(); PairCase::COUNT];
    let mut dropped = 0;
    for p in &partials {
        for (t, c) in totals.iter_mut().zip(&p.cases) {
            t.add(c);
        }
        dropped += p.dropped;
    }
    let mut cases = BTreeMap::new();
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for case in PairCase::ALL {
        let t = totals[case.index()];
        numerator += t.concordant;
        denominator += t.comparable;
        if t.pairs > 0 {
            cases.insert(case, t);
        }
    }
    let tally = PairTally {
        cases,
        numerator,
        denominator,
        dropped_pairs: dropped,
        beyond_grid,
        tau,
        weight_scheme: policy.weight_scheme,
    };
    if !(denominator > 0.0) {
        return Err(Error::NoComparablePairs);
    }
    Ok(Concordance {
        estimate: policy.final_fold.apply(numerator / denominator),
        tally,
    })
}
