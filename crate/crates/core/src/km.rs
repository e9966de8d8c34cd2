//! Product-limit estimation for the event and censoring distributions.

use serde::{Deserialize, Serialize};

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};

/// Right-continuous, nonincreasing step function starting at 1.
///
/// `values[k]` holds on `[jump_times[k], jump_times[k + 1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    jump_times: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(jump_times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if jump_times.len() != values.len() {
            return Err(Error::InvalidParameter(
                "step function needs one value per jump".into(),
            ));
        }
        if jump_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "jump times must be strictly increasing".into(),
            ));
        }
        let mut prev = 1.0;
        for &v in &values {
            if !(0.0..=prev).contains(&v) {
                return Err(Error::InvalidParameter(
                    "step values must be nonincreasing within [0, 1]".into(),
                ));
            }
            prev = v;
        }
        Ok(Self { jump_times, values })
    }

    /// The constant function 1.
    pub fn one() -> Self {
        Self {
            jump_times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.jump_times.partition_point(|&x| x <= t) {
            0 => 1.0,
            k => self.values[k - 1],
        }
    }

    /// Limit from the left, `f(t-)`.
    pub fn eval_left(&self, t: f64) -> f64 {
        match self.jump_times.partition_point(|&x| x < t) {
            0 => 1.0,
            k => self.values[k - 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KmTarget {
    Event,
    Censoring,
}

/// Kaplan-Meier estimate of the event survivor function or, with flipped
/// indicators, the censoring survivor function `G(t) = P(C > t)`.
///
/// At a shared time the risk set holds everyone with `T >= t`; the target
/// indicator's subjects are removed first and the others leave afterwards.
///
/// Runs of the product with no intervening removal of non-target subjects
/// telescope to a single ratio, so without censoring the estimate is exactly
/// `(n - #{T <= t}) / n`.
pub fn km_fit(ds: &SurvivalDataset, target: KmTarget) -> Result<StepFunction> {
    if ds.is_empty() {
        return Err(Error::NoRecords);
    }
    let times = ds.times();
    let hits: Vec<bool> = match target {
        KmTarget::Event => ds.events().to_vec(),
        KmTarget::Censoring => ds.events().iter().map(|e| !e).collect(),
    };
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));

    let mut jump_times = Vec::new();
    let mut values = Vec::new();
    let mut at_risk = times.len();
    let mut factor = 1.0_f64;
    let mut base = at_risk;
    let mut survival = 1.0_f64;
    let mut run_broken = false;

    let mut k = 0;
    while k < order.len() {
        let t = times[order[k]];
        let mut d = 0usize;
        let mut other = 0usize;
        while k < order.len() && times[order[k]] == t {
            if hits[order[k]] {
                d += 1;
            } else {
                other += 1;
            }
            k += 1;
        }
        if run_broken {
            factor = survival;
            base = at_risk;
            run_broken = false;
        }
        if d > 0 {
            let ratio = (at_risk - d) as f64 / base as f64;
            survival = if factor == 1.0 { ratio } else { factor * ratio };
            jump_times.push(t);
            values.push(survival);
        }
        if other > 0 {
            run_broken = true;
        }
        at_risk -= d + other;
    }
    Ok(StepFunction { jump_times, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    Uniform,
    /// `1 / G(T_i)^2`
    UnoSquared,
    /// `1 / (G(T_i-) * G(T_i))`
    PecProduct,
}

/// Anchor-subject IPCW weights. `None` marks an undefined weight (G = 0 where needed).
pub fn ipcw_weights(g: &StepFunction, ds: &SurvivalDataset, scheme: WeightScheme) -> Vec<Option<f64>> {
    ds.times().iter().map(|&t| anchor_weight(g, t, scheme)).collect()
}

pub(crate) fn anchor_weight(g: &StepFunction, t: f64, scheme: WeightScheme) -> Option<f64> {
    match scheme {
        WeightScheme::Uniform => Some(1.0),
        WeightScheme::UnoSquared => {
            let at = g.eval(t);
            (at > 0.0).then(|| 1.0 / (at * at))
        }
        WeightScheme::PecProduct => {
            let at = g.eval(t);
            let left = g.eval_left(t);
            (at > 0.0 && left > 0.0).then(|| 1.0 / (left * at))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(times: &[f64], events: &[bool]) -> SurvivalDataset {
        SurvivalDataset::from_columns(times, events).unwrap()
    }

    #[test]
    fn uncensored_is_empirical_survivor() {
        let s = km_fit(&ds(&[1.0, 2.0, 3.0], &[true; 3]), KmTarget::Event).unwrap();
        assert_eq!(s.eval(1.0), 2.0 / 3.0);
        assert_eq!(s.eval(2.0), 1.0 / 3.0);
        assert_eq!(s.eval(3.0), 0.0);
        assert_eq!(s.eval(0.0), 1.0);
    }

    #[test]
    fn censoring_km_without_censoring_is_one() {
        let g = km_fit(&ds(&[1.0, 2.0, 3.0], &[true; 3]), KmTarget::Censoring).unwrap();
        assert!(g.jump_times().is_empty());
        for t in [0.0, 1.0, 2.5, 100.0] {
            assert_eq!(g.eval(t), 1.0);
        }
    }

    #[test]
    fn mixed_fixture_matches_hand_product_limit() {
        let s = km_fit(&ds(&[1.0, 2.0, 3.0], &[true, false, true]), KmTarget::Event).unwrap();
        assert!((s.eval(1.0) - 2.0 / 3.0).abs() <= 1e-15);
        assert!((s.eval(2.0) - 2.0 / 3.0).abs() <= 1e-15);
        assert_eq!(s.eval(3.0), 0.0);
    }

    #[test]
    fn empty_dataset_errors() {
        let empty = SurvivalDataset::from_columns(&[], &[]).unwrap();
        assert_eq!(km_fit(&empty, KmTarget::Event), Err(Error::NoRecords));
    }

    #[test]
    fn eval_and_left_limit() {
        let f = StepFunction::new(vec![2.0], vec![0.5]).unwrap();
        assert_eq!(f.eval(2.0), 0.5);
        assert_eq!(f.eval_left(2.0), 1.0);
        assert_eq!(f.eval(50.0), 0.5);
    }

    #[test]
    fn weights_under_both_schemes() {
        let d = ds(&[1.0, 2.0], &[true, true]);
        let one = StepFunction::one();
        for scheme in [WeightScheme::UnoSquared, WeightScheme::PecProduct] {
            assert_eq!(ipcw_weights(&one, &d, scheme), vec![Some(1.0), Some(1.0)]);
        }
        // continuous at T_i = 2: G(2-) = G(2) = 0.5
        let g = StepFunction::new(vec![1.0, 3.0], vec![0.5, 0.25]).unwrap();
        let d2 = ds(&[2.0], &[true]);
        assert_eq!(ipcw_weights(&g, &d2, WeightScheme::UnoSquared), vec![Some(4.0)]);
        assert_eq!(ipcw_weights(&g, &d2, WeightScheme::PecProduct), vec![Some(4.0)]);
        // jump at T_i = 1: G(1-) = 1, G(1) = 0.5
        let d1 = ds(&[1.0], &[true]);
        assert_eq!(ipcw_weights(&g, &d1, WeightScheme::PecProduct), vec![Some(2.0)]);
        assert_eq!(ipcw_weights(&g, &d1, WeightScheme::UnoSquared), vec![Some(4.0)]);
    }

    #[test]
    fn zero_censoring_survival_gives_undefined_weight() {
        let g = StepFunction::new(vec![1.0], vec![0.0]).unwrap();
        let d = ds(&[2.0], &[true]);
        assert_eq!(ipcw_weights(&g, &d, WeightScheme::UnoSquared), vec![None]);
    }
}
