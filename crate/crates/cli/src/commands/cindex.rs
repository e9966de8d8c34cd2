use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use cindex_core::data::{RiskVector, TimeGrid};
use cindex_core::engine::Truncation;
use cindex_core::km::{km_fit, KmTarget};
use cindex_core::profiles::{
    builtin_profiles, run_multiverse, MultiverseInput, MultiverseOptions, Profile, ProfileSet,
};
use cindex_core::resampling::BootstrapSpec;
use cindex_core::transforms::{expected_mortality, interpolate, neg_rmst, risk_at_time};
use clap::Args;

use super::{Classify, Failure, Outcome};
use crate::io::{read_matrix, read_subjects};
use crate::report::{Provenance, Report};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    AtTime(f64),
    ExpectedMortality,
    NegRmst(f64),
}

impl Transform {
    fn label(&self) -> String {
        match self {
            Transform::AtTime(t) => format!("at-time:{t}"),
            Transform::ExpectedMortality => "expected-mortality".into(),
            Transform::NegRmst(t) => format!("neg-rmst:{t}"),
        }
    }
}

fn finite(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("'{s}' is not a finite number"))
}

fn parse_transform(s: &str) -> Result<Transform, String> {
    match s.split_once(':') {
        Some(("at-time", t)) => Ok(Transform::AtTime(finite(t)?)),
        Some(("neg-rmst", t)) => Ok(Transform::NegRmst(finite(t)?)),
        None if s == "expected-mortality" => Ok(Transform::ExpectedMortality),
        _ => Err("expected at-time:<t>, expected-mortality or neg-rmst:<T*>".into()),
    }
}

/// Interpolation target; `None` keeps the matrix's own grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridChoice(Option<TimeGrid>);

fn parse_grid(s: &str) -> Result<GridChoice, String> {
    if s == "native" {
        return Ok(GridChoice(None));
    }
    let parts: Vec<&str> = s.split(':').collect();
    let [start, end, step] = parts[..] else {
        return Err("expected start:end:step or native".into());
    };
    TimeGrid::regular(finite(start)?, finite(end)?, finite(step)?)
        .map(|g| GridChoice(Some(g)))
        .map_err(|e| e.to_string())
}

fn parse_tau(s: &str) -> Result<Truncation, String> {
    match s {
        "none" => Ok(Truncation::None),
        "max-uncensored" => Ok(Truncation::MaxUncensored),
        v => {
            let tau = finite(v)?;
            if tau < 0.0 {
                return Err("tau must be nonnegative".into());
            }
            Ok(Truncation::Value(tau))
        }
    }
}

fn parse_bootstrap(s: &str) -> Result<BootstrapSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [b, size, level] = parts[..] else {
        return Err("expected B:size:level, size may be n".into());
    };
    let replicates = b.parse().map_err(|_| format!("'{b}' is not a replicate count"))?;
    let sample_size = match size {
        "n" => None,
        v => Some(v.parse().map_err(|_| format!("'{v}' is not a sample size"))?),
    };
    let level = finite(level)?;
    if replicates == 0 || !(level > 0.0 && level < 1.0) {
        return Err("need B >= 1 and a level in (0, 1)".into());
    }
    Ok(BootstrapSpec {
        replicates,
        sample_size,
        level,
    })
}

#[derive(Args)]
pub struct CindexArgs {
    /// Subjects CSV: id,time,event[,risk][,cov_1..]
    #[arg(long)]
    subjects: PathBuf,
    /// Survival matrix CSV: id followed by one column per grid time.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Name of the risk column in the subjects file.
    #[arg(long, default_value = "risk")]
    risk_col: String,
    /// Derive risks from the matrix: at-time:<t>, expected-mortality or neg-rmst:<T*>.
    #[arg(long, value_parser = parse_transform)]
    transform: Option<Transform>,
    /// Grid the matrix is interpolated onto before expected-mortality and neg-rmst (start:end:step or native).
    #[arg(long, default_value = "0:355:1", value_parser = parse_grid)]
    grid: GridChoice,
    /// Comma-separated profile names (default: every built-in profile).
    #[arg(long, value_delimiter = ',')]
    profiles: Vec<String>,
    /// JSON file with a top-level "profiles" array of extra profile definitions.
    #[arg(long)]
    profile_config: Option<PathBuf>,
    /// Truncation for C_tau profiles: none, max-uncensored or a time. Defaults to each profile's own.
    #[arg(long, value_parser = parse_tau)]
    tau: Option<Truncation>,
    /// Subjects CSV used to fit the censoring distribution for profiles that take it from training data.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Bootstrap interval as B:size:level, e.g. 100:1000:0.95.
    #[arg(long, value_parser = parse_bootstrap)]
    bootstrap: Option<BootstrapSpec>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for report.json and report.csv; JSON goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn select_profiles(args: &CindexArgs) -> anyhow::Result<Vec<Profile>> {
    let mut catalog = builtin_profiles();
    let mut custom = Vec::new();
    if let Some(path) = &args.profile_config {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let set: ProfileSet = serde_json::from_str(&text)
            .with_context(|| format!("{}: invalid profile config", path.display()))?;
        set.validate().with_context(|| path.display().to_string())?;
        for p in set.profiles {
            if catalog.iter().any(|q| q.name == p.name) {
                bail!("{}: profile '{}' is already defined", path.display(), p.name);
            }
            custom.push(p.name.clone());
            catalog.push(p);
        }
    }
    if args.profiles.is_empty() {
        if custom.is_empty() {
            return Ok(catalog);
        }
        return Ok(catalog.into_iter().filter(|p| custom.contains(&p.name)).collect());
    }
    args.profiles
        .iter()
        .map(|name| {
            catalog
                .iter()
                .find(|p| &p.name == name)
                .cloned()
                .ok_or_else(|| anyhow!("unknown profile '{name}'"))
        })
        .collect()
}

pub fn run(args: CindexArgs) -> Outcome {
    let subjects = read_subjects(&args.subjects, &args.risk_col).input()?;
    let ds = subjects.dataset;
    if ds.is_empty() {
        return Err(Failure::Input(anyhow!("{}: no records", args.subjects.display())));
    }
    let matrix = match &args.matrix {
        Some(path) => Some(read_matrix(path, ds.ids()).input()?),
        None => None,
    };
    let profiles = select_profiles(&args).input()?;

    let (risks, risk_source, grid_used) = match (args.transform, &matrix) {
        (Some(_), None) => {
            return Err(Failure::Input(anyhow!("--transform needs --matrix")));
        }
        (Some(t), Some(sm)) => {
            let regrid = |sm| match &args.grid.0 {
                Some(g) => interpolate(sm, g),
                None => Ok(sm.clone()),
            };
            let (values, grid) = match t {
                Transform::AtTime(at) => (risk_at_time(sm, at), None),
                Transform::ExpectedMortality => {
                    let m = regrid(sm).compute()?;
                    (expected_mortality(&m), Some(m.grid().points().to_vec()))
                }
                Transform::NegRmst(t_star) => {
                    let m = regrid(sm).compute()?;
                    (neg_rmst(&m, t_star), Some(m.grid().points().to_vec()))
                }
            };
            (Some(values.compute()?), t.label(), grid)
        }
        (None, _) => match subjects.risks {
            Some(v) => (
                Some(RiskVector::new(v).input()?),
                format!("column:{}", args.risk_col),
                None,
            ),
            None => (None, "none".into(), None),
        },
    };

    let (training_censoring, censoring_source) = match &args.train {
        Some(path) => {
            let train = read_subjects(path, &args.risk_col).input()?;
            if train.dataset.is_empty() {
                return Err(Failure::Input(anyhow!("{}: no records", path.display())));
            }
            (
                Some(km_fit(&train.dataset, KmTarget::Censoring).compute()?),
                format!("train:{}", path.display()),
            )
        }
        None => (None, "test-set".into()),
    };

    let options = MultiverseOptions {
        tau: args.tau,
        training_censoring,
        bootstrap: args.bootstrap,
        seed: args.seed,
    };
    let input = MultiverseInput { risks, matrix };
    let multiverse = run_multiverse(&ds, &input, &profiles, &options);

    let tau = match args.tau {
        None => "profile-default".to_string(),
        Some(Truncation::None) => "none".into(),
        Some(Truncation::MaxUncensored) => "max-uncensored".into(),
        Some(Truncation::Value(v)) => v.to_string(),
    };
    let report = Report {
        provenance: Provenance {
            tool: "cindex-multiverse".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subjects: args.subjects.display().to_string(),
            matrix: args.matrix.as_ref().map(|p| p.display().to_string()),
            n_subjects: ds.len(),
            n_events: ds.event_count(),
            risk_source,
            grid: grid_used,
            tau,
            censoring_source,
            bootstrap: args.bootstrap,
            seed: args.seed,
            profiles,
        },
        results: multiverse.results,
    };
    match &args.out {
        Some(dir) => report.write(dir).input(),
        None => crate::io::write_text(None, &report.to_json().compute()?).input(),
    }
}
