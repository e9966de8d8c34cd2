//! Semi-synthetic data: Weibull proportional-hazards event times, three
//! censoring mechanisms, and the oracle C-index computed from the true curves.

use rand::distributions::{Distribution, Open01, Uniform};
use rand::seq::index;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{SurvivalDataset, SurvivalMatrix, TimeGrid};
use crate::engine::{concordance, ConcordancePolicy};
use crate::error::{Error, Result};
use crate::resampling::quantile;
use crate::rng::{stream, Purpose};
use crate::transforms::neg_rmst;

/// Hazard `h(t | x) = gamma * t^(gamma - 1) * lambda * exp(x' beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeibullPh {
    pub gamma: f64,
    pub lambda: f64,
    pub beta: Vec<f64>,
}

impl WeibullPh {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) || !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(
                "gamma and lambda must be positive and finite".into(),
            ));
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter("beta must be finite".into()));
        }
        Ok(())
    }

    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.beta).map(|(a, b)| a * b).sum()
    }

    pub fn survival(&self, t: f64, lp: f64) -> f64 {
        (-self.lambda * t.powf(self.gamma) * lp.exp()).exp()
    }

    /// Inverse of the survivor function at `u`.
    pub fn time_from_uniform(&self, u: f64, lp: f64) -> f64 {
        (-u.ln() / (self.lambda * lp.exp())).powf(1.0 / self.gamma)
    }

    fn check_covariates(&self, covariates: &[Vec<f64>]) -> Result<()> {
        self.validate()?;
        match covariates.iter().find(|row| row.len() != self.beta.len()) {
            Some(row) => Err(Error::LengthMismatch {
                expected: self.beta.len(),
                found: row.len(),
            }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CensoringMechanism {
    /// Weibull censoring hazard `gamma_c * t^(gamma_c - 1) * epsilon * lambda_c`.
    WeibullScaled {
        gamma_c: f64,
        lambda_c: f64,
        epsilon: f64,
    },
    /// As `WeibullScaled`, with the hazard multiplied by `exp(age * beta_age)`;
    /// `age_column` indexes the covariate row.
    AgeInformed {
        gamma_c: f64,
        lambda_c: f64,
        beta_age: f64,
        age_column: usize,
        epsilon: f64,
    },
    /// `C ~ Uniform(min T, Q_{1 - epsilon}(T))` over the uncensored times.
    UniformQuantile { epsilon: f64 },
}

impl CensoringMechanism {
    pub fn epsilon(&self) -> f64 {
        match *self {
            Self::WeibullScaled { epsilon, .. }
            | Self::AgeInformed { epsilon, .. }
            | Self::UniformQuantile { epsilon } => epsilon,
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::WeibullScaled { epsilon: e, .. }
            | Self::AgeInformed { epsilon: e, .. }
            | Self::UniformQuantile { epsilon: e } => *e = epsilon,
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let eps = self.epsilon();
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon {eps} must be finite and nonnegative"
            )));
        }
        match *self {
            Self::WeibullScaled {
                gamma_c, lambda_c, ..
            }
            | Self::AgeInformed {
                gamma_c, lambda_c, ..
            } => {
                if !(gamma_c > 0.0 && gamma_c.is_finite() && lambda_c > 0.0 && lambda_c.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "gamma_c and lambda_c must be positive and finite".into(),
                    ));
                }
            }
            Self::UniformQuantile { .. } if eps >= 1.0 => {
                return Err(Error::InvalidParameter(
                    "uniform_quantile epsilon must be below 1".into(),
                ));
            }
            Self::UniformQuantile { .. } => {}
        }
        if let Self::AgeInformed { beta_age, .. } = *self {
            if !beta_age.is_finite() {
                return Err(Error::InvalidParameter("beta_age must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Identifies one generated dataset: `dataset` is its index in a batch and
/// `setting` separates censoring draws made for different epsilon values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimulationKey {
    pub seed: u64,
    pub dataset: u64,
    pub setting: u64,
}

fn uniforms(key: SimulationKey, purpose: Purpose, n: usize) -> Vec<f64> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let context = match purpose {
                Purpose::Censoring => [key.dataset, key.setting],
                _ => [key.dataset, 0],
            };
            Open01.sample(&mut stream(key.seed, purpose, context, i as u64))
        })
        .collect()
}

/// Independent standard normal covariates, `p` per subject.
pub fn standard_normal_covariates(n: usize, p: usize, key: SimulationKey) -> Vec<Vec<f64>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(key.seed, Purpose::Covariates, [key.dataset, 0], i as u64);
            (0..p).map(|_| StandardNormal.sample(&mut rng)).collect()
        })
        .collect()
}

/// `n` distinct rows of `pool`, chosen at random.
pub fn subsample_rows(pool: &[Vec<f64>], n: usize, key: SimulationKey) -> Result<Vec<Vec<f64>>> {
    if n > pool.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {n} distinct rows from {} covariate rows",
            pool.len()
        )));
    }
    let mut rng = stream(key.seed, Purpose::Covariates, [key.dataset, 1], 0);
    Ok(index::sample(&mut rng, pool.len(), n)
        .into_iter()
        .map(|i| pool[i].clone())
        .collect())
}

pub fn generate_event_times(
    params: &WeibullPh,
    covariates: &[Vec<f64>],
    key: SimulationKey,
) -> Result<Vec<f64>> {
    params.check_covariates(covariates)?;
    let u = uniforms(key, Purpose::EventTimes, covariates.len());
    Ok(covariates
        .iter()
        .zip(u)
        .map(|(x, u)| params.time_from_uniform(u, params.linear_predictor(x)))
        .collect())
}

pub fn generate_censoring(
    mechanism: &CensoringMechanism,
    event_times: &[f64],
    covariates: &[Vec<f64>],
    key: SimulationKey,
) -> Result<Vec<f64>> {
    mechanism.validate()?;
    let n = event_times.len();
    match *mechanism {
        CensoringMechanism::WeibullScaled { epsilon: 0.0, .. }
        | CensoringMechanism::AgeInformed { epsilon: 0.0, .. } => Ok(vec![f64::INFINITY; n]),
        CensoringMechanism::WeibullScaled {
            gamma_c,
            lambda_c,
            epsilon,
        } => Ok(uniforms(key, Purpose::Censoring, n)
            .into_iter()
            .map(|u| (-u.ln() / (epsilon * lambda_c)).powf(1.0 / gamma_c))
            .collect()),
        CensoringMechanism::AgeInformed {
            gamma_c,
            lambda_c,
            beta_age,
            age_column,
            epsilon,
        } => {
            if covariates.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: covariates.len(),
                });
            }
            let ages = covariates
                .iter()
                .map(|row| {
                    row.get(age_column).copied().ok_or_else(|| {
                        Error::InvalidParameter(format!("age column {age_column} out of range"))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(uniforms(key, Purpose::Censoring, n)
                .into_iter()
                .zip(ages)
                .map(|(u, age)| (-u.ln() / (epsilon * lambda_c * (age * beta_age).exp())).powf(1.0 / gamma_c))
                .collect())
        }
        CensoringMechanism::UniformQuantile { epsilon } => {
            let mut sorted = event_times.to_vec();
            sorted.sort_by(f64::total_cmp);
            let (Some(&min), true) = (sorted.first(), sorted.iter().all(|t| t.is_finite())) else {
                return Err(Error::InvalidParameter(
                    "event times must be finite and nonempty".into(),
                ));
            };
            let max = quantile(&sorted, 1.0 - epsilon);
            if !(max > min) {
                return Err(Error::DegenerateCensoringRange { min, max });
            }
            let dist = Uniform::new(min, max);
            Ok((0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream(key.seed, Purpose::Censoring, [key.dataset, key.setting], i as u64);
                    dist.sample(&mut rng)
                })
                .collect())
        }
    }
}

/// Observed data `T = min(T~, C)`, `event = T~ < C`.
pub fn assemble(event_times: &[f64], censor_times: &[f64]) -> Result<SurvivalDataset> {
    if event_times.len() != censor_times.len() {
        return Err(Error::LengthMismatch {
            expected: event_times.len(),
            found: censor_times.len(),
        });
    }
    let times: Vec<f64> = event_times
        .iter()
        .zip(censor_times)
        .map(|(t, c)| t.min(*c))
        .collect();
    let events: Vec<bool> = event_times.iter().zip(censor_times).map(|(t, c)| t < c).collect();
    SurvivalDataset::from_columns(&times, &events)
}

/// Grid `{0, step, 2 step, ...}` up to `t_star`. When `t_star` is `None` it is
/// the ceiling of the largest uncensored time, so the oracle never depends on
/// the censoring draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleGrid {
    pub step: f64,
    pub t_star: Option<f64>,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self {
            step: 1.0,
            t_star: None,
        }
    }
}

impl OracleGrid {
    pub fn resolve(&self, uncensored_times: &[f64]) -> Result<(TimeGrid, f64)> {
        let t_star = match self.t_star {
            Some(t) => t,
            None => uncensored_times
                .iter()
                .copied()
                .max_by(f64::total_cmp)
                .ok_or(Error::NoRecords)?
                .ceil(),
        };
        let t_star = t_star.max(self.step);
        Ok((TimeGrid::regular(0.0, t_star, self.step)?, t_star))
    }
}

pub fn true_survival_matrix(
    params: &WeibullPh,
    covariates: &[Vec<f64>],
    grid: &TimeGrid,
) -> Result<SurvivalMatrix> {
    params.check_covariates(covariates)?;
    let rows = covariates
        .par_iter()
        .map(|x| {
            let lp = params.linear_predictor(x);
            grid.points().iter().map(|&t| params.survival(t, lp)).collect()
        })
        .collect();
    SurvivalMatrix::new(grid.clone(), rows)
}

/// C-index of the true model: risks are negative RMST of the true curves up to
/// `T*`, scored against the uncensored times with `policy` (Harrell when `None`).
pub fn oracle_cindex(
    params: &WeibullPh,
    covariates: &[Vec<f64>],
    uncensored_times: &[f64],
    grid: OracleGrid,
    policy: Option<&ConcordancePolicy>,
) -> Result<f64> {
    if covariates.len() != uncensored_times.len() {
        return Err(Error::LengthMismatch {
            expected: uncensored_times.len(),
            found: covariates.len(),
        });
    }
    let (grid, t_star) = grid.resolve(uncensored_times)?;
    let sm = true_survival_matrix(params, covariates, &grid)?;
    let risks = neg_rmst(&sm, t_star)?;
    let ds = SurvivalDataset::from_columns(uncensored_times, &vec![true; uncensored_times.len()])?;
    let harrell = ConcordancePolicy::harrell();
    Ok(concordance(&ds, &risks, policy.unwrap_or(&harrell), None)?.estimate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: f64, lambda: f64, beta: Vec<f64>) -> WeibullPh {
        WeibullPh { gamma, lambda, beta }
    }

    fn key(seed: u64) -> SimulationKey {
        SimulationKey {
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn inversion_hits_one_at_matching_uniform() {
        let p = params(1.7, 0.3, vec![0.4]);
        let lp = p.linear_predictor(&[2.0]);
        let u = (-p.lambda * lp.exp()).exp();
        assert!((p.time_from_uniform(u, lp) - 1.0).abs() < 1e-12);
        assert_eq!(p.survival(0.0, lp), 1.0);
    }

    #[test]
    fn standard_exponential_mean_within_three_sigma() {
        let p = params(1.0, 1.0, vec![0.0]);
        let n = 100_000;
        let t = generate_event_times(&p, &vec![vec![0.0]; n], key(42)).unwrap();
        let mean = t.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn hazard_scaling_shrinks_times_by_power() {
        let p = params(2.0, 0.5, vec![1.0]);
        let k: f64 = 3.0;
        let base = generate_event_times(&p, &[vec![0.0], vec![0.0]], key(1)).unwrap();
        let scaled = generate_event_times(&p, &[vec![k.ln()], vec![k.ln()]], key(1)).unwrap();
        for (b, s) in base.iter().zip(&scaled) {
            assert!((s / b - k.powf(-0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn covariate_dimension_is_checked() {
        let p = params(1.0, 1.0, vec![0.1, 0.2]);
        assert!(generate_event_times(&p, &[vec![1.0]], key(0)).is_err());
    }

    #[test]
    fn covariate_draws_are_seeded() {
        let k = SimulationKey {
            seed: 1,
            dataset: 2,
            setting: 0,
        };
        let a = standard_normal_covariates(5, 3, k);
        assert_eq!(a, standard_normal_covariates(5, 3, k));
        assert_eq!(a[..2], standard_normal_covariates(2, 3, k)[..]);
        let pool: Vec<Vec<f64>> = (0..10).map(|i| vec![f64::from(i)]).collect();
        let mut rows = subsample_rows(&pool, 10, k).unwrap();
        rows.sort_by(|x, y| x[0].total_cmp(&y[0]));
        assert_eq!(rows, pool);
        assert!(subsample_rows(&pool, 11, k).is_err());
    }

    #[test]
    fn zero_epsilon_never_censors() {
        let mech = CensoringMechanism::WeibullScaled {
            gamma_c: 1.0,
            lambda_c: 0.01,
            epsilon: 0.0,
        };
        let c = generate_censoring(&mech, &[1.0, 2.0], &[], key(0)).unwrap();
        assert!(c.iter().all(|c| c.is_infinite()));
        assert_eq!(assemble(&[1.0, 2.0], &c).unwrap().event_count(), 2);
    }

    #[test]
    fn uniform_quantile_ranges() {
        let t: Vec<f64> = (1..=11).map(f64::from).collect();
        let c = generate_censoring(
            &CensoringMechanism::UniformQuantile { epsilon: 0.0 },
            &t,
            &[],
            key(3),
        )
        .unwrap();
        assert!(c.iter().all(|&c| (1.0..11.0).contains(&c)));
        let c = generate_censoring(
            &CensoringMechanism::UniformQuantile { epsilon: 0.5 },
            &t,
            &[],
            key(3),
        )
        .unwrap();
        assert!(c.iter().all(|&c| (1.0..6.0).contains(&c)));
        let flat = generate_censoring(
            &CensoringMechanism::UniformQuantile { epsilon: 0.2 },
            &[4.0; 5],
            &[],
            key(3),
        );
        assert_eq!(flat, Err(Error::DegenerateCensoringRange { min: 4.0, max: 4.0 }));
    }

    #[test]
    fn assemble_uses_strict_inequality() {
        let d = assemble(&[2.0, 3.0, 5.0], &[3.0, 2.0, 5.0]).unwrap();
        assert_eq!(d.times(), &[2.0, 2.0, 5.0]);
        assert_eq!(d.events(), &[true, false, false]);
    }

    #[test]
    fn age_informed_censors_older_subjects_sooner() {
        let mech = CensoringMechanism::AgeInformed {
            gamma_c: 1.0,
            lambda_c: 0.1,
            beta_age: 1.0,
            age_column: 0,
            epsilon: 1.0,
        };
        let young = generate_censoring(&mech, &[1.0], &[vec![0.0]], key(8)).unwrap()[0];
        let old = generate_censoring(&mech, &[1.0], &[vec![2.0]], key(8)).unwrap()[0];
        assert!((young / old - 2f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn censoring_rate_rises_with_epsilon() {
        let p = params(1.3, 2f64.ln() / 120f64.powf(1.3), vec![0.5]);
        let mut last = 0.0;
        for (s, eps) in [0.0, 0.5, 1.0, 3.0, 7.0, 13.0].into_iter().enumerate() {
            let mech = CensoringMechanism::WeibullScaled {
                gamma_c: 1.0,
                lambda_c: 1.0 / 300.0,
                epsilon: eps,
            };
            let mut censored = 0usize;
            for d in 0..100u64 {
                let cov: Vec<Vec<f64>> = (0..50).map(|i| vec![f64::from(i % 5) - 2.0]).collect();
                let k = SimulationKey {
                    seed: 5,
                    dataset: d,
                    setting: s as u64,
                };
                let t = generate_event_times(&p, &cov, k).unwrap();
                let c = generate_censoring(&mech, &t, &cov, k).unwrap();
                censored += t.len() - assemble(&t, &c).unwrap().event_count();
            }
            let rate = censored as f64 / 5000.0;
            assert!(rate >= last, "eps {eps}: {rate} < {last}");
            last = rate;
        }
        assert!(last > 0.5);
    }

    #[test]
    fn oracle_without_signal_is_zero_under_harrell() {
        let p = params(1.0, 0.05, vec![0.0]);
        let cov = vec![vec![1.0]; 20];
        let t = generate_event_times(&p, &cov, key(2)).unwrap();
        assert_eq!(
            oracle_cindex(&p, &cov, &t, OracleGrid::default(), None).unwrap(),
            0.0
        );
    }

    #[test]
    fn oracle_ignores_censoring() {
        let p = params(1.3, 0.01, vec![0.7]);
        let cov: Vec<Vec<f64>> = (0..40).map(|i| vec![f64::from(i) / 10.0]).collect();
        let t = generate_event_times(&p, &cov, key(4)).unwrap();
        let a = oracle_cindex(&p, &cov, &t, OracleGrid::default(), None).unwrap();
        for eps in [0.5, 7.0] {
            let mech = CensoringMechanism::WeibullScaled {
                gamma_c: 1.0,
                lambda_c: 0.01,
                epsilon: eps,
            };
            let _ = generate_censoring(&mech, &t, &cov, key(4)).unwrap();
            assert_eq!(
                oracle_cindex(&p, &cov, &t, OracleGrid::default(), None).unwrap(),
                a
            );
        }
        assert!(a > 0.5);
    }
}
