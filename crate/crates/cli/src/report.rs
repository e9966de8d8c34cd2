use std::path::Path;

use anyhow::{Context, Result};
use cindex_core::profiles::{Profile, ProfileResult};
use cindex_core::resampling::BootstrapSpec;
use serde::{Deserialize, Serialize};

/// Everything needed to rerun the report: inputs, knobs and the full profile definitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub subjects: String,
    pub matrix: Option<String>,
    pub n_subjects: usize,
    pub n_events: usize,
    pub risk_source: String,
    pub grid: Option<Vec<f64>>,
    pub tau: String,
    pub censoring_source: String,
    pub bootstrap: Option<BootstrapSpec>,
    pub seed: u64,
    pub profiles: Vec<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub results: Vec<ProfileResult>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "profile",
            "family",
            "weight_scheme",
            "tau",
            "estimate",
            "ci_lo",
            "ci_hi",
            "numerator",
            "denominator",
            "dropped_pairs",
            "beyond_grid",
            "error",
        ])?;
        let num = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        for r in &self.results {
            w.write_record([
                r.profile.clone(),
                json_word(&r.family)?,
                json_word(&r.weight_scheme)?,
                num(r.tau),
                num(r.estimate),
                num(r.ci.as_ref().map(|c| c.lo)),
                num(r.ci.as_ref().map(|c| c.hi)),
                num(r.numerator),
                num(r.denominator),
                r.dropped_pairs.to_string(),
                r.beyond_grid.to_string(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        std::fs::write(dir.join("report.csv"), self.to_csv()?)?;
        Ok(())
    }
}

fn json_word<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_value(v)?.as_str().unwrap_or_default().to_string())
}
