//! Naive double-loop reference for [`super::concordance`].
//!
//! Shares nothing with the engine beyond the policy's case table: pair labels
//! are rebuilt from their textual definition, the censoring survivor function
//! is recomputed by a quadratic product-limit, and sums run straight through
//! `(i, j)` without per-case or per-anchor accumulation.

use super::{ConcordancePolicy, FinalFold, GSource, Truncation, WeightScheme};
use crate::data::{PairCase, RiskVector, SurvivalDataset};
use crate::error::{Error, Result};
use crate::km::StepFunction;

pub const ORACLE_MAX_SUBJECTS: usize = 2000;

fn naive_censoring_survival(times: &[f64], events: &[bool], t: f64, strict: bool) -> f64 {
    let mut distinct: Vec<f64> = times.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut g = 1.0;
    for &s in &distinct {
        if (strict && s >= t) || (!strict && s > t) {
            break;
        }
        let at_risk = times.iter().filter(|&&x| x >= s).count() as f64;
        let censored = times.iter().zip(events).filter(|(&x, &e)| x == s && !e).count() as f64;
        g *= 1.0 - censored / at_risk;
    }
    g
}

fn label(ti: f64, di: bool, tj: f64, dj: bool, mi: f64, mj: f64, tol: f64) -> Option<PairCase> {
    if ti > tj {
        return None;
    }
    let family = match (ti < tj, di, dj) {
        (true, true, true) => "1",
        (true, true, false) => "2",
        (true, false, true) => "3",
        (true, false, false) => "4",
        (false, true, true) => "5",
        (false, true, false) => "6",
        (false, false, true) => "7",
        (false, false, false) => "8",
    };
    let suffix = if matches!(family, "3" | "4" | "8") {
        ""
    } else if (mi - mj).abs() <= tol {
        "C"
    } else if mi > mj {
        "A"
    } else {
        "B"
    };
    PairCase::from_label(&format!("{family}{suffix}"))
}

pub fn brute_force_oracle(
    ds: &SurvivalDataset,
    risks: &RiskVector,
    policy: &ConcordancePolicy,
    g: Option<&StepFunction>,
) -> Result<f64> {
    let n = ds.len();
    if n > ORACLE_MAX_SUBJECTS {
        return Err(Error::OracleTooLarge {
            n,
            limit: ORACLE_MAX_SUBJECTS,
        });
    }
    if risks.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: risks.len(),
        });
    }
    let times = ds.times();
    let events = ds.events();
    let m = risks.values();

    let tau = match policy.truncation {
        Truncation::None => f64::INFINITY,
        Truncation::Value(v) => v,
        Truncation::MaxUncensored => {
            let mut best = f64::NEG_INFINITY;
            for i in 0..n {
                if events[i] && times[i] > best {
                    best = times[i];
                }
            }
            best
        }
    };
    if policy.weight_scheme != WeightScheme::Uniform && policy.g_source == GSource::Provided && g.is_none() {
        return Err(Error::MissingCensoringDistribution);
    }
    let g_at = |t: f64, strict: bool| -> f64 {
        match (policy.g_source, g) {
            (GSource::Provided, Some(f)) if strict => f.eval_left(t),
            (GSource::Provided, Some(f)) => f.eval(t),
            _ => naive_censoring_survival(times, events, t, strict),
        }
    };

    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        if policy.truncation != Truncation::None && !(times[i] < tau) {
            continue;
        }
        let w = match policy.weight_scheme {
            WeightScheme::Uniform => 1.0,
            WeightScheme::UnoSquared => {
                let gi = g_at(times[i], false);
                if gi <= 0.0 {
                    continue;
                }
                1.0 / (gi * gi)
            }
            WeightScheme::PecProduct => {
                let gi = g_at(times[i], false);
                let gl = g_at(times[i], true);
                if gi <= 0.0 || gl <= 0.0 {
                    continue;
                }
                1.0 / (gl * gi)
            }
        };
        for j in 0..n {
            if i == j {
                continue;
            }
            let Some(case) = label(
                times[i],
                events[i],
                times[j],
                events[j],
                m[i],
                m[j],
                policy.tie_tolerance,
            ) else {
                continue;
            };
            let Some(rule) = policy.case_table.get(&case) else {
                continue;
            };
            if rule.comparable_weight <= 0.0 {
                continue;
            }
            den += w * rule.comparable_weight;
            num += w * rule.comparable_weight * rule.credit;
        }
    }
    if !(den > 0.0) {
        return Err(Error::NoComparablePairs);
    }
    let c = num / den;
    Ok(match policy.final_fold {
        FinalFold::Identity => c,
        FinalFold::MaxWithComplement => {
            if 1.0 - c > c {
                1.0 - c
            } else {
                c
            }
        }
    })
}
