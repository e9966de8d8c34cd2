use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::PairCase;
use crate::error::{Error, Result};
pub use crate::km::WeightScheme;

/// Inclusion weight and concordance credit for one pair case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseRule {
    pub comparable_weight: f64,
    pub credit: f64,
}

impl CaseRule {
    pub const fn new(comparable_weight: f64, credit: f64) -> Self {
        Self {
            comparable_weight,
            credit,
        }
    }

    pub const fn included(credit: f64) -> Self {
        Self::new(1.0, credit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GSource {
    /// Fit the censoring Kaplan-Meier on the evaluated data.
    TestSet,
    /// Use a censoring distribution supplied by the caller (e.g. fitted on training data).
    Provided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    None,
    Value(f64),
    /// `tau = max{T_i : event}` on the evaluated data.
    MaxUncensored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalFold {
    Identity,
    /// Report `max(c, 1 - c)`.
    MaxWithComplement,
}

impl FinalFold {
    pub fn apply(self, c: f64) -> f64 {
        match self {
            FinalFold::Identity => c,
            FinalFold::MaxWithComplement => c.max(1.0 - c),
        }
    }
}

/// Everything that decides which ordered pairs count and how much.
///
/// Cases missing from `case_table` are excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcordancePolicy {
    pub case_table: BTreeMap<PairCase, CaseRule>,
    #[serde(default)]
    pub tie_tolerance: f64,
    pub weight_scheme: WeightScheme,
    pub g_source: GSource,
    pub truncation: Truncation,
    pub final_fold: FinalFold,
}

impl ConcordancePolicy {
    /// Uniform weights, no truncation, identity fold and the given table.
    pub fn with_table<I: IntoIterator<Item = (PairCase, CaseRule)>>(rules: I) -> Self {
        Self {
            case_table: rules.into_iter().collect(),
            tie_tolerance: 0.0,
            weight_scheme: WeightScheme::Uniform,
            g_source: GSource::TestSet,
            truncation: Truncation::None,
            final_fold: FinalFold::Identity,
        }
    }

    /// The tie-weighted estimator with inclusion weight `omega_o` for tied
    /// times with `(event, censored)` and credit `omega_p` for tied predictions.
    /// `general(0, 0)` is the plain Harrell estimator.
    pub fn general(omega_o: f64, omega_p: f64) -> Self {
        use PairCase::*;
        let mut rules = vec![
            (Case1A, CaseRule::included(1.0)),
            (Case1B, CaseRule::included(0.0)),
            (Case1C, CaseRule::included(omega_p)),
            (Case2A, CaseRule::included(1.0)),
            (Case2B, CaseRule::included(0.0)),
            (Case2C, CaseRule::included(omega_p)),
        ];
        if omega_o > 0.0 {
            rules.extend([
                (Case6A, CaseRule::new(omega_o, 1.0)),
                (Case6B, CaseRule::new(omega_o, 0.0)),
                (Case6C, CaseRule::new(omega_o, omega_p)),
            ]);
        }
        Self::with_table(rules)
    }

    pub fn harrell() -> Self {
        Self::general(0.0, 0.0)
    }

    /// Uno's truncated IPCW estimator with `1 / G(T_i)^2` weights.
    pub fn uno(truncation: Truncation) -> Self {
        Self {
            weight_scheme: WeightScheme::UnoSquared,
            truncation,
            ..Self::harrell()
        }
    }

    pub fn rule(&self, case: PairCase) -> Option<CaseRule> {
        self.case_table
            .get(&case)
            .copied()
            .filter(|r| r.comparable_weight > 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tie_tolerance >= 0.0) || !self.tie_tolerance.is_finite() {
            return Err(Error::InvalidPolicy(
                "tie tolerance must be a nonnegative number".into(),
            ));
        }
        for (case, rule) in &self.case_table {
            if !(rule.comparable_weight >= 0.0) || !rule.comparable_weight.is_finite() {
                return Err(Error::InvalidPolicy(format!(
                    "case {case}: comparable weight must be finite and nonnegative"
                )));
            }
            if !(0.0..=1.0).contains(&rule.credit) {
                return Err(Error::InvalidPolicy(format!(
                    "case {case}: credit must lie in [0, 1]"
                )));
            }
        }
        if let Truncation::Value(tau) = self.truncation {
            if tau.is_nan() {
                return Err(Error::InvalidPolicy("tau is NaN".into()));
            }
        }
        Ok(())
    }

    /// Dense lookup indexed by [`PairCase::index`].
    pub(crate) fn dense_table(&self) -> [Option<CaseRule>; PairCase::COUNT] {
        let mut table = [None; PairCase::COUNT];
        for case in PairCase::ALL {
            table[case.index()] = self.rule(case);
        }
        table
    }
}
