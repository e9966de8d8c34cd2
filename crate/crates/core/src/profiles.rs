//! Named policies emulating the pair semantics of published C-index software.
//!
//! Each profile is plain data: a case table plus weighting, truncation and
//! folding knobs. Tables transcribe the documented comparable (CP) and
//! concordant (CN) behavior per case; a case absent from a table is not
//! comparable.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{PairCase, RiskVector, SurvivalDataset, SurvivalMatrix};
use crate::engine::{
    concordance, concordance_td_with_policy, AntoliniVariant, CaseRule, CaseTally, Concordance,
    ConcordancePolicy, FinalFold, GSource, Truncation, WeightScheme,
};
use crate::error::Result;
use crate::km::StepFunction;
use crate::resampling::{bootstrap_ci, BootstrapSpec};

/// Tie tolerance used by scikit-survival.
pub const SKSURV_TIE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorFamily {
    /// Harrell-type concordance over scalar risks.
    #[serde(rename = "C")]
    C,
    /// Truncated concordance over scalar risks.
    #[serde(rename = "C_tau")]
    CTau,
    /// Time-dependent concordance over survival curves.
    #[serde(rename = "C_td")]
    CTd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub name: String,
    pub family: EstimatorFamily,
    pub policy: ConcordancePolicy,
    /// The emulated function refuses to run without an explicit tau.
    #[serde(default)]
    pub tau_required: bool,
    #[serde(default)]
    pub notes: String,
}

fn rules(entries: &[(PairCase, f64)]) -> Vec<(PairCase, CaseRule)> {
    entries
        .iter()
        .map(|&(c, credit)| (c, CaseRule::included(credit)))
        .collect()
}

/// Cases 1 and 2 (`T_i < T_j`, `i` uncensored). `tied` is the credit for tied
/// predictions, or `None` to drop them from the comparable set.
fn earlier_rows(tied: Option<f64>) -> Vec<(PairCase, CaseRule)> {
    use PairCase::*;
    let mut out = rules(&[(Case1A, 1.0), (Case1B, 0.0), (Case2A, 1.0), (Case2B, 0.0)]);
    if let Some(c) = tied {
        out.extend(rules(&[(Case1C, c), (Case2C, c)]));
    }
    out
}

/// Case 6 (`T_i = T_j`, `(1, 0)`) with credits for A/B and optional tied predictions.
fn tied_time_rows(a: f64, b: f64, tied: Option<f64>) -> Vec<(PairCase, CaseRule)> {
    use PairCase::*;
    let mut out = rules(&[(Case6A, a), (Case6B, b)]);
    if let Some(c) = tied {
        out.push((Case6C, CaseRule::included(c)));
    }
    out
}

fn profile(name: &str, family: EstimatorFamily, rows: Vec<(PairCase, CaseRule)>, notes: &str) -> Profile {
    Profile {
        name: name.to_string(),
        family,
        policy: ConcordancePolicy::with_table(rows),
        tau_required: false,
        notes: notes.to_string(),
    }
}

pub fn hmisc(outx: bool) -> Profile {
    let tied = (!outx).then_some(0.5);
    let mut rows = earlier_rows(tied);
    rows.extend(tied_time_rows(1.0, 0.0, tied));
    let name = if outx { "hmisc_outx" } else { "hmisc" };
    profile(
        name,
        EstimatorFamily::C,
        rows,
        "Hmisc rcorr.cens; tied predictions get half credit unless outx = TRUE, which drops them",
    )
}

pub fn survmetrics() -> Profile {
    use PairCase::*;
    let mut rows = earlier_rows(Some(0.5));
    rows.extend(rules(&[(Case5A, 0.5), (Case5B, 0.5), (Case5C, 1.0)]));
    rows.extend(tied_time_rows(1.0, 0.5, Some(0.5)));
    profile(
        "survmetrics",
        EstimatorFamily::C,
        rows,
        "SurvMetrics Cindex; tied event times with both events are comparable, case 6B earns half credit",
    )
}

pub fn lifelines() -> Profile {
    let mut rows = earlier_rows(Some(0.5));
    rows.extend(tied_time_rows(1.0, 0.0, Some(0.5)));
    profile(
        "lifelines",
        EstimatorFamily::C,
        rows,
        "lifelines concordance_index",
    )
}

pub fn pysurvival(include_ties: bool) -> Profile {
    let tied = include_ties.then_some(0.5);
    let mut rows = earlier_rows(tied);
    rows.extend(tied_time_rows(1.0, 0.0, tied));
    let name = if include_ties {
        "pysurvival"
    } else {
        "pysurvival_noties"
    };
    let mut p = profile(
        name,
        EstimatorFamily::C,
        rows,
        "pysurvival concordance_index; IPCW 1/(G(T-)G(T)) without truncation, reports max(C, 1 - C)",
    );
    p.policy.weight_scheme = WeightScheme::PecProduct;
    p.policy.final_fold = FinalFold::MaxWithComplement;
    p
}

pub fn sksurv_censored() -> Profile {
    let mut rows = earlier_rows(Some(0.5));
    rows.extend(tied_time_rows(1.0, 0.0, Some(0.5)));
    let mut p = profile(
        "sksurv_censored",
        EstimatorFamily::C,
        rows,
        "scikit-survival concordance_index_censored; predictions tied within 1e-8",
    );
    p.policy.tie_tolerance = SKSURV_TIE_TOLERANCE;
    p
}

pub fn sksurv_ipcw() -> Profile {
    let mut rows = earlier_rows(Some(0.5));
    rows.extend(tied_time_rows(1.0, 0.0, Some(0.5)));
    let mut p = profile(
        "sksurv_ipcw",
        EstimatorFamily::CTau,
        rows,
        "scikit-survival concordance_index_ipcw; 1/G(T)^2 with G fitted on training data; no truncation by default",
    );
    p.policy.tie_tolerance = SKSURV_TIE_TOLERANCE;
    p.policy.weight_scheme = WeightScheme::UnoSquared;
    p.policy.g_source = GSource::Provided;
    p
}

/// pec cindex with its three tie switches.
pub fn pec(tied_outcome_in: bool, tied_pred_in: bool, tied_match_in: bool) -> Profile {
    use PairCase::*;
    let mut rows = earlier_rows(tied_pred_in.then_some(0.5));
    if tied_outcome_in {
        rows.extend(rules(&[(Case5A, 1.0), (Case5B, 0.0)]));
    }
    let case_5c = match (tied_outcome_in, tied_pred_in, tied_match_in) {
        (_, _, true) => Some(1.0),
        (true, true, false) => Some(0.5),
        (false, true, false) => Some(0.0),
        (_, false, false) => None,
    };
    if let Some(c) = case_5c {
        rows.push((Case5C, CaseRule::included(c)));
    }
    rows.extend(tied_time_rows(1.0, 0.0, tied_pred_in.then_some(0.5)));
    let name = if tied_outcome_in && tied_pred_in && tied_match_in {
        "pec".to_string()
    } else {
        format!(
            "pec_{}{}{}",
            tied_outcome_in as u8, tied_pred_in as u8, tied_match_in as u8
        )
    };
    let mut p = profile(
        &name,
        EstimatorFamily::CTau,
        rows,
        "pec cindex; 1/(G(T-)G(T)) from the evaluated data; tau defaults to the largest event time; \
         suffix digits are tiedOutcomeIn, tiedPredictionsIn, tiedMatchIn",
    );
    p.policy.weight_scheme = WeightScheme::PecProduct;
    p.policy.truncation = Truncation::MaxUncensored;
    p
}

fn survival_concordance(name: &str, scheme: WeightScheme, notes: &str) -> Profile {
    let mut rows = earlier_rows(Some(0.5));
    rows.extend(tied_time_rows(1.0, 0.0, Some(0.5)));
    let mut p = profile(name, EstimatorFamily::CTau, rows, notes);
    p.policy.weight_scheme = scheme;
    p
}

pub fn survival_n() -> Profile {
    survival_concordance(
        "survival_n",
        WeightScheme::Uniform,
        "survival concordance(timewt = \"n\"); no truncation unless ymax is given",
    )
}

pub fn survival_n_g2() -> Profile {
    survival_concordance(
        "survival_n_g2",
        WeightScheme::UnoSquared,
        "survival concordance(timewt = \"n/G2\"); weight 1/G(T)^2 as tabulated for this option",
    )
}

pub fn survc1() -> Profile {
    use PairCase::*;
    let rows = rules(&[
        (Case1A, 1.0),
        (Case1B, 0.0),
        (Case1C, 0.5),
        (Case2A, 1.0),
        (Case2B, 0.0),
        (Case2C, 1.0),
    ]);
    let mut p = profile(
        "survc1",
        EstimatorFamily::CTau,
        rows,
        "survC1 Est.Cval; 1/G(T)^2, tied times never comparable, case 2C earns full credit; tau is mandatory",
    );
    p.policy.weight_scheme = WeightScheme::UnoSquared;
    p.tau_required = true;
    p
}

pub fn pycox_policy(variant: AntoliniVariant) -> ConcordancePolicy {
    use PairCase::*;
    let table = match variant {
        AntoliniVariant::Antolini => rules(&[
            (Case1A, 1.0),
            (Case1B, 0.0),
            (Case1C, 0.0),
            (Case2A, 1.0),
            (Case2B, 0.0),
            (Case2C, 0.0),
            (Case6A, 1.0),
            (Case6B, 0.0),
            (Case6C, 0.0),
        ]),
        AntoliniVariant::AdjAntolini => rules(&[
            (Case1A, 1.0),
            (Case1B, 0.0),
            (Case1C, 0.5),
            (Case2A, 1.0),
            (Case2B, 0.0),
            (Case2C, 0.5),
            (Case5A, 0.5),
            (Case5B, 0.5),
            (Case5C, 1.0),
            (Case6A, 1.0),
            (Case6B, 0.0),
            (Case6C, 0.5),
            (Case7A, 0.0),
            (Case7B, 1.0),
            (Case7C, 0.5),
        ]),
    };
    ConcordancePolicy::with_table(table)
}

pub fn pycox(variant: AntoliniVariant) -> Profile {
    let (name, notes) = match variant {
        AntoliniVariant::Antolini => ("pycox_ant", "pycox concordance_td(method = \"antolini\")"),
        AntoliniVariant::AdjAntolini => (
            "pycox_adj_ant",
            "pycox concordance_td(method = \"adj_antolini\"), the package default",
        ),
    };
    Profile {
        name: name.into(),
        family: EstimatorFamily::CTd,
        policy: pycox_policy(variant),
        tau_required: false,
        notes: notes.into(),
    }
}

/// Every shipped profile, in report order.
pub fn builtin_profiles() -> Vec<Profile> {
    let mut out = vec![
        hmisc(false),
        hmisc(true),
        survmetrics(),
        lifelines(),
        pysurvival(true),
        pysurvival(false),
        sksurv_censored(),
        pec(true, true, true),
    ];
    for bits in (0..7u8).rev() {
        out.push(pec(bits & 4 != 0, bits & 2 != 0, bits & 1 != 0));
    }
    out.extend([
        survival_n(),
        survival_n_g2(),
        survc1(),
        sksurv_ipcw(),
        pycox(AntoliniVariant::Antolini),
        pycox(AntoliniVariant::AdjAntolini),
    ]);
    out
}

/// Top-level shape of a profile config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub profiles: Vec<Profile>,
}

impl ProfileSet {
    pub fn validate(&self) -> Result<()> {
        for p in &self.profiles {
            p.policy.validate()?;
        }
        Ok(())
    }
}

pub fn find_profile(name: &str) -> Option<Profile> {
    builtin_profiles().into_iter().find(|p| p.name == name)
}

/// Predictions available to a multiverse run. Scalar-risk profiles need
/// `risks`; time-dependent profiles need `matrix`.
#[derive(Debug, Clone, Default)]
pub struct MultiverseInput {
    pub risks: Option<RiskVector>,
    pub matrix: Option<SurvivalMatrix>,
}

impl MultiverseInput {
    fn subset(&self, idx: &[usize]) -> Self {
        Self {
            risks: self.risks.as_ref().map(|r| r.subset(idx)),
            matrix: self.matrix.as_ref().map(|m| m.subset(idx)),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MultiverseOptions {
    /// Replaces the truncation of every `C_tau` profile.
    pub tau: Option<Truncation>,
    /// Censoring distribution for profiles with a provided `G` (typically fit on training data).
    pub training_censoring: Option<StepFunction>,
    pub bootstrap: Option<BootstrapSpec>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
    pub replicates: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileResult {
    pub profile: String,
    pub family: EstimatorFamily,
    pub weight_scheme: WeightScheme,
    pub tau: Option<f64>,
    pub estimate: Option<f64>,
    pub ci: Option<ConfidenceInterval>,
    pub numerator: Option<f64>,
    pub denominator: Option<f64>,
    pub dropped_pairs: u64,
    pub beyond_grid: u64,
    pub per_case_tally: BTreeMap<PairCase, CaseTally>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiverseReport {
    pub results: Vec<ProfileResult>,
}

impl MultiverseReport {
    pub fn get(&self, profile: &str) -> Option<&ProfileResult> {
        self.results.iter().find(|r| r.profile == profile)
    }
}

/// The policy a profile runs with once run-wide options are applied.
pub fn effective_policy(
    profile: &Profile,
    options: &MultiverseOptions,
) -> std::result::Result<ConcordancePolicy, String> {
    let mut policy = profile.policy.clone();
    if profile.family == EstimatorFamily::CTau {
        match options.tau {
            Some(t) => policy.truncation = t,
            None if profile.tau_required => return Err("requires explicit tau".into()),
            None => {}
        }
    }
    if policy.weight_scheme != WeightScheme::Uniform
        && policy.g_source == GSource::Provided
        && options.training_censoring.is_none()
    {
        return Err("requires training censoring distribution".into());
    }
    Ok(policy)
}

fn evaluate(
    profile: &Profile,
    policy: &ConcordancePolicy,
    ds: &SurvivalDataset,
    input: &MultiverseInput,
    g: Option<&StepFunction>,
) -> std::result::Result<Concordance, String> {
    let out: Result<Concordance> = match profile.family {
        EstimatorFamily::CTd => {
            let sm = input.matrix.as_ref().ok_or("requires survival matrix")?;
            concordance_td_with_policy(ds, sm, policy, g)
        }
        EstimatorFamily::C | EstimatorFamily::CTau => {
            let risks = input.risks.as_ref().ok_or("requires risk vector")?;
            concordance(ds, risks, policy, g)
        }
    };
    out.map_err(|e| e.to_string())
}

fn error_cell(profile: &Profile, policy: &ConcordancePolicy, message: String) -> ProfileResult {
    ProfileResult {
        profile: profile.name.clone(),
        family: profile.family,
        weight_scheme: policy.weight_scheme,
        tau: None,
        estimate: None,
        ci: None,
        numerator: None,
        denominator: None,
        dropped_pairs: 0,
        beyond_grid: 0,
        per_case_tally: BTreeMap::new(),
        error: Some(message),
    }
}

fn run_profile(
    profile: &Profile,
    ds: &SurvivalDataset,
    input: &MultiverseInput,
    options: &MultiverseOptions,
) -> ProfileResult {
    let policy = match effective_policy(profile, options) {
        Ok(p) => p,
        Err(msg) => return error_cell(profile, &profile.policy, msg),
    };
    let g = options.training_censoring.as_ref();
    let full = match evaluate(profile, &policy, ds, input, g) {
        Ok(c) => c,
        Err(msg) => return error_cell(profile, &policy, msg),
    };
    let ci = options.bootstrap.map(|spec| {
        let all: Vec<usize> = (0..ds.len()).collect();
        let estimator = |idx: &[usize]| {
            evaluate(profile, &policy, &ds.subset(idx), &input.subset(idx), g)
                .map(|c| c.estimate)
                .map_err(|_| ())
        };
        match bootstrap_ci(&all, estimator, spec, options.seed) {
            Ok(b) => Ok(ConfidenceInterval {
                level: spec.level,
                lo: b.lo,
                hi: b.hi,
                replicates: spec.replicates,
                failed: b.failed,
            }),
            Err(e) => Err(e.to_string()),
        }
    });
    let (ci, error) = match ci {
        Some(Ok(ci)) => (Some(ci), None),
        Some(Err(e)) => (None, Some(format!("bootstrap: {e}"))),
        None => (None, None),
    };
    ProfileResult {
        profile: profile.name.clone(),
        family: profile.family,
        weight_scheme: full.tally.weight_scheme,
        tau: full.tally.tau,
        estimate: Some(full.estimate),
        ci,
        numerator: Some(full.tally.numerator),
        denominator: Some(full.tally.denominator),
        dropped_pairs: full.tally.dropped_pairs,
        beyond_grid: full.tally.beyond_grid,
        per_case_tally: full.tally.cases,
        error,
    }
}

/// Runs each profile independently; a profile that cannot run on the given
/// input yields an error cell instead of failing the whole report.
pub fn run_multiverse(
    ds: &SurvivalDataset,
    input: &MultiverseInput,
    profiles: &[Profile],
    options: &MultiverseOptions,
) -> MultiverseReport {
    let results = profiles
        .par_iter()
        .map(|p| run_profile(p, ds, input, options))
        .collect();
    MultiverseReport { results }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TimeGrid;

    fn ds(times: &[f64], events: &[bool]) -> SurvivalDataset {
        SurvivalDataset::from_columns(times, events).unwrap()
    }

    fn risk_input(v: &[f64]) -> MultiverseInput {
        MultiverseInput {
            risks: Some(RiskVector::new(v.to_vec()).unwrap()),
            matrix: None,
        }
    }

    fn scalar_profiles() -> Vec<Profile> {
        builtin_profiles()
            .into_iter()
            .filter(|p| p.family != EstimatorFamily::CTd)
            .collect()
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<String> = builtin_profiles().into_iter().map(|p| p.name).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
        assert!(find_profile("pec_010").is_some());
        assert!(find_profile("pec_111").is_none());
    }

    #[test]
    fn clean_data_collapses_every_scalar_profile() {
        let d = ds(&[1.0, 2.0, 3.0, 4.0, 5.0], &[true; 5]);
        let input = risk_input(&[0.9, 0.2, 0.7, 0.4, 0.1]);
        let options = MultiverseOptions {
            tau: Some(Truncation::None),
            training_censoring: Some(StepFunction::one()),
            ..Default::default()
        };
        let report = run_multiverse(&d, &input, &scalar_profiles(), &options);
        let first = report.results[0].estimate.unwrap();
        for r in &report.results {
            assert_eq!(r.estimate, Some(first), "{}", r.profile);
        }
    }

    #[test]
    fn missing_inputs_become_error_cells() {
        let d = ds(&[1.0, 2.0, 3.0], &[true, false, true]);
        let report = run_multiverse(
            &d,
            &risk_input(&[0.3, 0.2, 0.1]),
            &[
                pycox(AntoliniVariant::Antolini),
                survc1(),
                sksurv_ipcw(),
                hmisc(false),
            ],
            &MultiverseOptions::default(),
        );
        let errors: Vec<Option<&str>> = report.results.iter().map(|r| r.error.as_deref()).collect();
        assert_eq!(
            errors,
            vec![
                Some("requires survival matrix"),
                Some("requires explicit tau"),
                Some("requires training censoring distribution"),
                None
            ]
        );
        let only_matrix = MultiverseInput {
            risks: None,
            matrix: Some(SurvivalMatrix::new(TimeGrid::new(vec![0.0]).unwrap(), vec![vec![1.0]; 3]).unwrap()),
        };
        let r = run_multiverse(&d, &only_matrix, &[lifelines()], &MultiverseOptions::default());
        assert_eq!(r.results[0].error.as_deref(), Some("requires risk vector"));
    }

    #[test]
    fn four_subject_fixture_across_two_profiles() {
        let d = ds(&[1.0, 2.0, 3.0, 3.0], &[true, true, false, true]);
        let report = run_multiverse(
            &d,
            &risk_input(&[0.9, 0.5, 0.7, 0.2]),
            &[hmisc(true), survival_n()],
            &MultiverseOptions::default(),
        );
        for r in &report.results {
            assert_eq!(r.estimate, Some(4.0 / 6.0));
            assert_eq!(r.denominator, Some(6.0));
        }
    }

    #[test]
    fn outx_matches_sksurv_without_ties() {
        let d = ds(&[1.0, 2.0, 3.0, 4.0, 6.0], &[true, false, true, true, false]);
        let input = risk_input(&[0.5, 0.9, 0.1, 0.3, 0.2]);
        let mut sk = sksurv_censored();
        sk.policy.tie_tolerance = 0.0;
        let r = run_multiverse(&d, &input, &[hmisc(true), sk], &MultiverseOptions::default());
        assert_eq!(r.results[0].estimate, r.results[1].estimate);
    }

    #[test]
    fn tau_override_only_touches_truncated_family() {
        let d = ds(&[1.0, 2.0, 3.0, 4.0], &[true; 4]);
        let options = MultiverseOptions {
            tau: Some(Truncation::Value(2.5)),
            ..Default::default()
        };
        let r = run_multiverse(
            &d,
            &risk_input(&[4.0, 3.0, 1.0, 2.0]),
            &[hmisc(false), pec(true, true, true)],
            &options,
        );
        assert_eq!(r.results[0].tau, None);
        assert_eq!(r.results[0].denominator, Some(6.0));
        assert_eq!(r.results[1].tau, Some(2.5));
        assert_eq!(r.results[1].denominator, Some(5.0));
    }

    #[test]
    fn bootstrap_attaches_interval() {
        let t: Vec<f64> = (1..=30).map(f64::from).collect();
        let d = ds(&t, &[true; 30]);
        let m: Vec<f64> = t.iter().map(|x| -x).collect();
        let options = MultiverseOptions {
            bootstrap: Some(BootstrapSpec {
                replicates: 20,
                sample_size: None,
                level: 0.95,
            }),
            seed: 1,
            ..Default::default()
        };
        let r = run_multiverse(&d, &risk_input(&m), &[hmisc(false)], &options);
        let ci = r.results[0].ci.clone().unwrap();
        assert_eq!((ci.lo, ci.hi), (1.0, 1.0));
    }

    #[test]
    fn profile_set_round_trips_through_json() {
        let set = ProfileSet {
            profiles: builtin_profiles(),
        };
        let text = serde_json::to_string(&set).unwrap();
        let back: ProfileSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, set);
        back.validate().unwrap();
    }
}
