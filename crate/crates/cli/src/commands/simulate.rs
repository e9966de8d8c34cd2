use std::fmt::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use cindex_core::synthetic::{
    assemble, generate_censoring, generate_event_times, oracle_cindex, standard_normal_covariates,
    subsample_rows, CensoringMechanism, OracleGrid, SimulationKey, WeibullPh,
};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;

use super::{Classify, Failure, Outcome};
use crate::io::{read_covariates, write_subjects};

#[derive(Clone, Copy, ValueEnum)]
pub enum Mechanism {
    #[value(name = "weibull_scaled")]
    WeibullScaled,
    #[value(name = "age_informed")]
    AgeInformed,
    #[value(name = "uniform_quantile")]
    UniformQuantile,
}

/// Parameter file. Event model: `gamma`, `lambda`, `beta`. Censoring:
/// `gamma_c` and `lambda_c` for the Weibull mechanisms, plus `beta_age`
/// and `age_column` for age_informed.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimParams {
    gamma: f64,
    lambda: f64,
    beta: Vec<f64>,
    gamma_c: Option<f64>,
    lambda_c: Option<f64>,
    beta_age: Option<f64>,
    age_column: Option<usize>,
}

impl SimParams {
    fn mechanism(&self, kind: Mechanism) -> anyhow::Result<CensoringMechanism> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| anyhow!("parameter file lacks {name}"));
        let m = match kind {
            Mechanism::WeibullScaled => CensoringMechanism::WeibullScaled {
                gamma_c: need(self.gamma_c, "gamma_c")?,
                lambda_c: need(self.lambda_c, "lambda_c")?,
                epsilon: 0.0,
            },
            Mechanism::AgeInformed => CensoringMechanism::AgeInformed {
                gamma_c: need(self.gamma_c, "gamma_c")?,
                lambda_c: need(self.lambda_c, "lambda_c")?,
                beta_age: need(self.beta_age, "beta_age")?,
                age_column: self
                    .age_column
                    .ok_or_else(|| anyhow!("parameter file lacks age_column"))?,
                epsilon: 0.0,
            },
            Mechanism::UniformQuantile => CensoringMechanism::UniformQuantile { epsilon: 0.0 },
        };
        Ok(m)
    }
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Subjects per dataset.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    datasets: usize,
    #[arg(long, value_enum)]
    mechanism: Mechanism,
    /// Censoring scale factors, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    epsilon_list: Vec<f64>,
    /// JSON parameter file.
    #[arg(long)]
    params: PathBuf,
    /// Covariate pool to subsample without replacement; standard normal draws when omitted.
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

fn write_dataset(
    dir: &Path,
    k: usize,
    event_times: &[f64],
    covariates: &[Vec<f64>],
    risks: &[f64],
    mechanism: &CensoringMechanism,
    key: SimulationKey,
) -> anyhow::Result<()> {
    let c = generate_censoring(mechanism, event_times, covariates, key)?;
    let ds = assemble(event_times, &c)?;
    write_subjects(
        &dir.join(format!("dataset_{k}.csv")),
        &ds,
        Some(risks),
        Some(covariates),
    )
}

pub fn run(args: SimulateArgs) -> Outcome {
    let text = std::fs::read_to_string(&args.params)
        .with_context(|| format!("cannot read {}", args.params.display()))
        .input()?;
    let params: SimParams = serde_json::from_str(&text)
        .with_context(|| format!("{}: invalid parameters", args.params.display()))
        .input()?;
    let model = WeibullPh {
        gamma: params.gamma,
        lambda: params.lambda,
        beta: params.beta.clone(),
    };
    model.validate().input()?;
    let base = params.mechanism(args.mechanism).input()?;
    let mechanisms: Vec<CensoringMechanism> =
        args.epsilon_list.iter().map(|&e| base.with_epsilon(e)).collect();
    for m in &mechanisms {
        m.validate().input()?;
    }
    if args.n == 0 || args.datasets == 0 {
        return Err(Failure::Input(anyhow!("--n and --datasets must be positive")));
    }
    let pool = match &args.covariates {
        Some(path) => {
            let pool = read_covariates(path).input()?;
            if pool[0].len() != model.beta.len() {
                return Err(Failure::Input(anyhow!(
                    "{}: {} covariate columns for {} coefficients",
                    path.display(),
                    pool[0].len(),
                    model.beta.len()
                )));
            }
            Some(pool)
        }
        None => None,
    };
    if let Some(pool) = &pool {
        if pool.len() < args.n {
            return Err(Failure::Input(anyhow!(
                "covariate pool has {} rows, need at least {}",
                pool.len(),
                args.n
            )));
        }
    }

    let dirs: Vec<PathBuf> = args
        .epsilon_list
        .iter()
        .map(|e| args.out_dir.join(format!("eps_{e}")))
        .collect();
    for d in &dirs {
        std::fs::create_dir_all(d)
            .with_context(|| format!("cannot create {}", d.display()))
            .input()?;
    }

    let oracles = (0..args.datasets)
        .into_par_iter()
        .map(|k| -> anyhow::Result<f64> {
            let key = SimulationKey {
                seed: args.seed,
                dataset: k as u64,
                setting: 0,
            };
            let cov = match &pool {
                Some(pool) => subsample_rows(pool, args.n, key)?,
                None => standard_normal_covariates(args.n, model.beta.len(), key),
            };
            let t = generate_event_times(&model, &cov, key)?;
            let risks: Vec<f64> = cov.iter().map(|x| model.linear_predictor(x)).collect();
            for (s, (dir, m)) in dirs.iter().zip(&mechanisms).enumerate() {
                let key = SimulationKey {
                    setting: s as u64,
                    ..key
                };
                write_dataset(dir, k, &t, &cov, &risks, m, key)?;
            }
            Ok(oracle_cindex(&model, &cov, &t, OracleGrid::default(), None)?)
        })
        .collect::<anyhow::Result<Vec<f64>>>()
        .compute()?;

    let mut summary = String::from("dataset,oracle\n");
    for (k, o) in oracles.iter().enumerate() {
        writeln!(summary, "{k},{o}").expect("writing to a String");
    }
    let path = args.out_dir.join("oracle.csv");
    std::fs::write(&path, summary)
        .with_context(|| format!("cannot write {}", path.display()))
        .input()
}
