use std::fmt::Write;
use std::path::PathBuf;

use anyhow::anyhow;
use cindex_core::km::{km_fit, KmTarget};
use clap::{Args, ValueEnum};

use super::{Classify, Failure, Outcome};
use crate::io::{read_subjects, write_text};

#[derive(Clone, Copy, ValueEnum)]
pub enum Target {
    Event,
    Censoring,
}

#[derive(Args)]
pub struct KmArgs {
    #[arg(long)]
    subjects: PathBuf,
    #[arg(long, value_enum, default_value_t = Target::Event)]
    target: Target,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: KmArgs) -> Outcome {
    let subjects = read_subjects(&args.subjects, "risk").input()?;
    if subjects.dataset.is_empty() {
        return Err(Failure::Input(anyhow!("{}: no records", args.subjects.display())));
    }
    let target = match args.target {
        Target::Event => KmTarget::Event,
        Target::Censoring => KmTarget::Censoring,
    };
    let s = km_fit(&subjects.dataset, target).compute()?;
    let mut text = String::from("time,value\n");
    if s.jump_times().is_empty() {
        // constant 1
        text.push_str("0,1\n");
    }
    for (t, v) in s.jump_times().iter().zip(s.values()) {
        writeln!(text, "{t},{v}").expect("writing to a String");
    }
    write_text(args.out.as_deref(), &text).input()
}
