//! Integration tests for the experiment runner: determinism, JSON/CSV row
//! equivalence, validation errors, and the compiled binary's exit codes.

use std::process::Command;

use subdiff_cli::{
    render, run, to_csv, to_json, validate, Experiment, ExperimentConfig, Format, Report, RunError,
};

fn base_config(experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        nu: None,
        nu_list: None,
        trials: None,
        seed: 11,
        epsilon: None,
        n: None,
        atoms: None,
    }
}

fn gap_config(experiment: Experiment, nu: u32, trials: u64) -> ExperimentConfig {
    ExperimentConfig {
        nu: Some(nu),
        trials: Some(trials),
        ..base_config(experiment)
    }
}

/// Strip the wall-time line so reports can be compared byte-for-byte.
fn without_wall_time(json: &str) -> String {
    json.lines()
        .filter(|l| !l.contains("wall_time_ms"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn reports_are_deterministic_modulo_wall_time() {
    for config in [
        gap_config(Experiment::GapLip, 4, 8),
        gap_config(Experiment::GapCvx, 4, 8),
        gap_config(Experiment::GadgetStats, 4, 32),
    ] {
        let a = to_json(&run(&config).unwrap()).unwrap();
        let b = to_json(&run(&config).unwrap()).unwrap();
        assert_eq!(without_wall_time(&a), without_wall_time(&b));
    }
    let ulln = ExperimentConfig {
        nu_list: Some(vec![16, 64]),
        trials: Some(4),
        ..base_config(Experiment::Ulln1d)
    };
    let a = to_json(&run(&ulln).unwrap()).unwrap();
    let b = to_json(&run(&ulln).unwrap()).unwrap();
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
}

#[test]
fn different_seeds_differ() {
    let mut c1 = gap_config(Experiment::GapLip, 4, 8);
    let mut c2 = c1.clone();
    c1.seed = 1;
    c2.seed = 2;
    let a = to_json(&run(&c1).unwrap()).unwrap();
    let b = to_json(&run(&c2).unwrap()).unwrap();
    assert_ne!(without_wall_time(&a), without_wall_time(&b));
}

#[test]
fn csv_and_json_encode_identical_row_data() {
    let config = gap_config(Experiment::GapLip, 4, 8);
    let report = run(&config).unwrap();
    let json: serde_json::Value = serde_json::from_str(&to_json(&report).unwrap()).unwrap();
    let csv_text = to_csv(&report).unwrap();
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let rows = json["rows"].as_array().unwrap();
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), rows.len());
    for (record, row) in records.iter().zip(rows) {
        for (name, cell) in headers.iter().zip(record.iter()) {
            let v = &row[name];
            let as_text = match v {
                serde_json::Value::Null => String::new(),
                serde_json::Value::Bool(b) => b.to_string(),
                serde_json::Value::Number(n) => {
                    // Compare numerically: CSV prints floats slightly
                    // differently from serde_json.
                    let parsed: f64 = cell.parse().unwrap();
                    assert!(
                        (parsed - n.as_f64().unwrap()).abs() <= 1e-12 * parsed.abs().max(1.0),
                        "field {name}: csv {cell} vs json {n}"
                    );
                    continue;
                }
                serde_json::Value::String(s) => s.clone(),
                other => panic!("unexpected row field {other:?}"),
            };
            assert_eq!(cell, as_text, "field {name}");
        }
    }
}

#[test]
fn eps_zero_is_a_config_error() {
    let config = ExperimentConfig {
        nu_list: Some(vec![10]),
        trials: Some(2),
        epsilon: Some(0.0),
        ..base_config(Experiment::EpsUlln)
    };
    match validate(&config) {
        Err(RunError::Config(errors)) => {
            assert!(errors.iter().any(|e| e.contains("counterexample regime")));
        }
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn over_capacity_nu_is_a_capacity_error() {
    let config = gap_config(Experiment::GapLip, 60, 1);
    match validate(&config) {
        Err(e @ RunError::Capacity(_)) => assert_eq!(e.exit_code(), 3),
        other => panic!("expected a capacity error, got {other:?}"),
    }
}

#[test]
fn all_violations_are_listed() {
    let config = ExperimentConfig {
        nu_list: Some(vec![]),
        trials: Some(0),
        epsilon: None,
        ..base_config(Experiment::EpsUlln)
    };
    match validate(&config) {
        Err(RunError::Config(errors)) => assert!(errors.len() >= 3, "got {errors:?}"),
        other => panic!("expected config errors, got {other:?}"),
    }
}

#[test]
fn shatter_report_realizes_all_patterns() {
    let config = ExperimentConfig {
        n: Some(3),
        ..base_config(Experiment::Shatter)
    };
    match run(&config).unwrap() {
        Report::Shatter(r) => {
            assert_eq!(r.witnesses.len(), 3);
            assert_eq!(r.rows.len(), 8);
            assert!(r.all_patterns_realized);
        }
        other => panic!("expected a shatter report, got {other:?}"),
    }
}

#[test]
fn eps_ulln_custom_atoms_parse() {
    let config = ExperimentConfig {
        nu_list: Some(vec![50]),
        trials: Some(2),
        epsilon: Some(0.2),
        atoms: Some("0.1:0.25, 0.9:0.75".into()),
        ..base_config(Experiment::EpsUlln)
    };
    match run(&config).unwrap() {
        Report::Convergence(r) => assert_eq!(r.rows.len(), 2),
        other => panic!("expected a convergence report, got {other:?}"),
    }
}

#[test]
fn render_formats() {
    let config = gap_config(Experiment::GadgetStats, 3, 4);
    let report = run(&config).unwrap();
    let json = render(&report, Format::Json).unwrap();
    assert!(json.trim_start().starts_with('{'));
    let csv_text = render(&report, Format::Csv).unwrap();
    assert!(csv_text.starts_with("trial,"));
}

// ---------------------------------------------------------------------------
// Binary-level checks.
// ---------------------------------------------------------------------------

#[test]
fn binary_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = Command::new(env!("CARGO_BIN_EXE_subdiff-lab"))
        .args([
            "gap-lip",
            "--nu",
            "4",
            "--trials",
            "5",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["config"]["experiment"], "gap-lip");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn binary_exit_codes_distinguish_config_and_capacity() {
    let config_err = Command::new(env!("CARGO_BIN_EXE_subdiff-lab"))
        .args(["eps-ulln", "--nu-list", "10", "--epsilon", "0"])
        .output()
        .unwrap();
    assert_eq!(config_err.status.code(), Some(2));
    let capacity_err = Command::new(env!("CARGO_BIN_EXE_subdiff-lab"))
        .args(["gap-lip", "--nu", "60", "--trials", "1"])
        .output()
        .unwrap();
    assert_eq!(capacity_err.status.code(), Some(3));
}

#[test]
fn binary_ulln_1d_subcommand_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_subdiff-lab"))
        .args(["ulln-1d", "--nu-list", "16,64", "--trials", "2", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("nu,seed_index,trial_seed,gap"));
    assert_eq!(text.trim_end().lines().count(), 5, "header + 4 rows");
}

#[test]
fn binary_csv_has_header() {
    let out = Command::new(env!("CARGO_BIN_EXE_subdiff-lab"))
        .args(["shatter", "--n", "2", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("pattern_index,pattern,realized,matches"));
}
