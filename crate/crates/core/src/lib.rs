//! Configurable pairwise concordance for right-censored survival data.
//!
//! One engine ([`engine::concordance`]) evaluates every C-index variant; the
//! variants differ only in their [`engine::ConcordancePolicy`]. The
//! [`profiles`] module ships policies that mirror common software packages,
//! and [`profiles::run_multiverse`] evaluates many of them side by side.

pub mod data;
pub mod engine;
pub mod error;
pub mod km;
pub mod profiles;
pub mod resampling;
pub mod rng;
pub mod synthetic;
pub mod transforms;

pub use data::{
    PairCase, RankRelation, RiskVector, SurvivalDataset, SurvivalMatrix, SurvivalRecord, TimeGrid,
};
pub use engine::{concordance, concordance_td, AntoliniVariant, Concordance, ConcordancePolicy, PairTally};
pub use error::{Error, Result};
pub use km::{km_fit, KmTarget, StepFunction};
