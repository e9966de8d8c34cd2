use std::path::Path;
use std::process::{Command, Output};

use cindex_cli::report::Report;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cindex-multiverse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> String {
    path.display().to_string()
}

const FOUR: &str = "id,time,event,score\na,1,1,0.9\nb,2,1,0.5\nc,3,0,0.7\nd,3,1,0.2\n";

fn report_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn risk_column_with_two_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let subjects = dir.path().join("s.csv");
    std::fs::write(&subjects, FOUR).unwrap();
    let out = run(&[
        "cindex",
        "--subjects",
        &p(&subjects),
        "--risk-col",
        "score",
        "--profiles",
        "hmisc,survival_n",
    ]);
    let report = report_json(&out);
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0]["profile"], "hmisc");
    assert_eq!(results[1]["profile"], "survival_n");
    // (d, c) tied at 3 with d the event: counted by both, discordant for both
    for r in results {
        assert!((r["estimate"].as_f64().unwrap() - 4.0 / 6.0).abs() < 1e-12);
    }
    assert_eq!(report["provenance"]["risk_source"], "column:score");
}

#[test]
fn out_dir_holds_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let subjects = dir.path().join("s.csv");
    std::fs::write(&subjects, FOUR).unwrap();
    let out_dir = dir.path().join("report");
    let out = run(&[
        "cindex",
        "--subjects",
        &p(&subjects),
        "--risk-col",
        "score",
        "--profiles",
        "hmisc_outx",
        "--out",
        &p(&out_dir),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("profile,family,weight_scheme,tau,estimate"));
    assert!(lines
        .next()
        .unwrap()
        .starts_with("hmisc_outx,C,uniform,,0.6666666666666666,,,4,6,0,0,"));
    assert!(lines.next().is_none());

    let json = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    let report: Report = serde_json::from_str(&json).unwrap();
    assert_eq!(report.to_json().unwrap(), json);
}

#[test]
fn matrix_profile_without_matrix_is_an_error_cell() {
    let dir = tempfile::tempdir().unwrap();
    let subjects = dir.path().join("s.csv");
    std::fs::write(&subjects, FOUR).unwrap();
    let out = run(&[
        "cindex",
        "--subjects",
        &p(&subjects),
        "--risk-col",
        "score",
        "--profiles",
        "pycox_ant,hmisc",
    ]);
    let report = report_json(&out);
    let r = &report["results"][0];
    assert_eq!(r["error"], "requires survival matrix");
    assert!(r["estimate"].is_null());
    assert!(report["results"][1]["estimate"].is_number());
}

#[test]
fn rmst_from_matrix_with_pec_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let subjects = dir.path().join("s.csv");
    let matrix = dir.path().join("m.csv");
    std::fs::write(&subjects, "id,time,event\na,1,1\nb,2,1\nc,3,0\nd,4,0\n").unwrap();
    std::fs::write(
        &matrix,
        "id,0,2,4\na,1,0.2,0.1\nb,1,0.5,0.3\nc,1,0.7,0.6\nd,1,0.9,0.8\n",
    )
    .unwrap();
    let out = run(&[
        "cindex",
        "--subjects",
        &p(&subjects),
        "--matrix",
        &p(&matrix),
        "--transform",
        "neg-rmst:355",
        "--profiles",
        "pec",
    ]);
    let report = report_json(&out);
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 1);
    // tau = largest event time; with strict truncation only a anchors
    assert_eq!(results[0]["tau"].as_f64(), Some(2.0));
    assert_eq!(results[0]["estimate"].as_f64(), Some(1.0));
    assert_eq!(report["provenance"]["risk_source"], "neg-rmst:355");
    assert_eq!(report["provenance"]["grid"].as_array().unwrap().len(), 356);
}

#[test]
fn schema_violation_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let subjects = dir.path().join("s.csv");
    std::fs::write(&subjects, "id,time,event,risk\na,1,1,0.5\nb,-2,0,0.1\n").unwrap();
    let out = run(&["cindex", "--subjects", &p(&subjects)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    std::fs::write(&subjects, "id,time,event\na,1,2\n").unwrap();
    let out = run(&["cindex", "--subjects", &p(&subjects)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    std::fs::write(&subjects, "time,id,event\n1,a,1\n").unwrap();
    let out = run(&["cindex", "--subjects", &p(&subjects)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn unknown_profile_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let subjects = dir.path().join("s.csv");
    std::fs::write(&subjects, FOUR).unwrap();
    let out = run(&[
        "cindex",
        "--subjects",
        &p(&subjects),
        "--risk-col",
        "score",
        "--profiles",
        "nope",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown profile 'nope'"));
}

#[test]
fn km_event_and_censoring() {
    let dir = tempfile::tempdir().unwrap();
    let subjects = dir.path().join("s.csv");
    std::fs::write(&subjects, "id,time,event\na,1,1\nb,2,1\nc,3,1\n").unwrap();
    let out = run(&["km", "--subjects", &p(&subjects)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (t, v) = l.split_once(',').unwrap();
            (t.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows, vec![(1.0, 2.0 / 3.0), (2.0, 1.0 / 3.0), (3.0, 0.0)]);

    let out = run(&["km", "--subjects", &p(&subjects), "--target", "censoring"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "time,value\n0,1\n");
}

#[test]
fn km_on_header_only_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let subjects = dir.path().join("s.csv");
    std::fs::write(&subjects, "id,time,event\n").unwrap();
    let out = run(&["km", "--subjects", &p(&subjects)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no records"));
}

fn simulate(dir: &Path, eps: &str, seed: &str) -> Output {
    let params = dir.join("params.json");
    std::fs::write(
        &params,
        r#"{"gamma": 1.2, "lambda": 0.01, "beta": [0.7, -0.4], "gamma_c": 1.0, "lambda_c": 0.02}"#,
    )
    .unwrap();
    run(&[
        "simulate",
        "--n",
        "50",
        "--datasets",
        "3",
        "--mechanism",
        "weibull_scaled",
        "--epsilon-list",
        eps,
        "--params",
        &p(&params),
        "--seed",
        seed,
        "--out-dir",
        &p(&dir.join(format!("out_{seed}"))),
    ])
}

#[test]
fn zero_censoring_emits_only_events() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), "0,2", "5");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let base = dir.path().join("out_5");
    let mut censored_at_2 = 0;
    for k in 0..3 {
        let zero = std::fs::read_to_string(base.join(format!("eps_0/dataset_{k}.csv"))).unwrap();
        let mut lines = zero.lines();
        assert_eq!(lines.next(), Some("id,time,event,risk,cov_1,cov_2"));
        assert!(lines.all(|l| l.split(',').nth(2) == Some("1")));
        let two = std::fs::read_to_string(base.join(format!("eps_2/dataset_{k}.csv"))).unwrap();
        censored_at_2 += two
            .lines()
            .skip(1)
            .filter(|l| l.split(',').nth(2) == Some("0"))
            .count();
    }
    assert!(censored_at_2 > 0);
    let oracle = std::fs::read_to_string(base.join("oracle.csv")).unwrap();
    assert_eq!(oracle.lines().count(), 4);
}

#[test]
fn simulated_dataset_feeds_back_into_cindex() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simulate(dir.path(), "1", "8").status.success());
    let data = dir.path().join("out_8/eps_1/dataset_0.csv");
    let out = run(&[
        "cindex",
        "--subjects",
        &p(&data),
        "--profiles",
        "hmisc,survc1",
        "--tau",
        "50",
    ]);
    let report = report_json(&out);
    let results = report["results"].as_array().unwrap();
    assert!(results[0]["estimate"].as_f64().unwrap() > 0.5);
    assert_eq!(results[1]["tau"].as_f64(), Some(50.0));
}

#[test]
fn bad_parameters_fail() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.json");
    std::fs::write(&params, r#"{"gamma": -1, "lambda": 0.01, "beta": [1]}"#).unwrap();
    let out = run(&[
        "simulate",
        "--mechanism",
        "uniform_quantile",
        "--epsilon-list",
        "0.1",
        "--params",
        &p(&params),
        "--out-dir",
        &p(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&params, r#"{"gamma": 1, "lambda": 0.01, "beta": [1]}"#).unwrap();
    let out = run(&[
        "simulate",
        "--mechanism",
        "weibull_scaled",
        "--epsilon-list",
        "1",
        "--params",
        &p(&params),
        "--out-dir",
        &p(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma_c"));
}
