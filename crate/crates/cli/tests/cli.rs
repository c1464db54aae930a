use std::fs;
use std::path::{Path, PathBuf};

use halflie::cli::execute;
use halflie::config::{parse_config, ConfigError, ExperimentKind, Format};
use halflie::report::{Cell, Report};
use halflie::{emit_report, run_experiment, RunOptions};
use serde_json::Value;

const MINIMAL_TROTTER: &str = r#"{
    "instance": { "name": "affine", "params": [1.0] },
    "curves": [{ "kind": "fiber_line", "v": [1.0] }, { "kind": "base_line", "x": [1.0] }],
    "t_grid": [1.0]
}"#;

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_cli(command: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        "halflie".to_string(),
        command.to_string(),
        "--config".into(),
        config.display().to_string(),
        "--out".into(),
        out.display().to_string(),
        "--quiet".into(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    execute(args)
}

#[test]
fn minimal_trotter_config_parses() {
    let c = parse_config(MINIMAL_TROTTER).unwrap();
    assert_eq!(c.instance.as_ref().unwrap().name, "affine");
    assert_eq!(c.curves.len(), 2);
    assert_eq!(c.tol, 1e-2);
    c.validate_for(ExperimentKind::Trotter).unwrap();
}

#[test]
fn negative_tolerance_names_the_field() {
    let text = MINIMAL_TROTTER.replacen("\"t_grid\"", "\"tol\": -1, \"t_grid\"", 1);
    let err = parse_config(&text).unwrap_err();
    assert_eq!(err.field(), "tol");
    assert!(err.to_string().starts_with("tol:"));
}

#[test]
fn unknown_instance_lists_the_registry() {
    let text = MINIMAL_TROTTER.replace("affine", "torus");
    let err = parse_config(&text).unwrap_err();
    assert_eq!(err.field(), "instance.name");
    let message = err.to_string();
    for name in ["oscillator", "affine", "unit_group_conjugation", "loop_group"] {
        assert!(message.contains(name), "{message}");
    }
}

#[test]
fn schema_errors_carry_a_path() {
    let err = parse_config(r#"{ "instance": { "name": "affine", "parms": [1] } }"#).unwrap_err();
    assert!(matches!(err, ConfigError::Schema { .. }));
    assert!(err.field().starts_with("instance"), "{err}");

    let err = parse_config(r#"{ "t_grid": [1.0, "x"] }"#).unwrap_err();
    assert!(err.field().starts_with("t_grid"), "{err}");

    let err = parse_config("{ not json").unwrap_err();
    assert!(matches!(err, ConfigError::Schema { .. }));
}

#[test]
fn kind_specific_validation() {
    let c = parse_config(r#"{ "instance": { "name": "affine", "params": [1.0] } }"#).unwrap();
    assert_eq!(c.validate_for(ExperimentKind::StrongTrotter).unwrap_err().field(), "t_grid");
    let c = parse_config(MINIMAL_TROTTER).unwrap();
    assert_eq!(c.validate_for(ExperimentKind::StrongTrotter).unwrap_err().field(), "curves");
    let declared = MINIMAL_TROTTER.replacen('{', r#"{ "experiment": "trotter","#, 1);
    let c = parse_config(&declared).unwrap();
    assert_eq!(c.validate_for(ExperimentKind::Commutator).unwrap_err().field(), "experiment");
    let err = parse_config(r#"{ "indices": [4, 4] }"#).unwrap_err();
    assert_eq!(err.field(), "indices[1]");
}

fn sample_report(rows: usize) -> Report {
    let mut r = Report::new(ExperimentKind::Trotter, "affine", vec!["t", "n", "error", "target_serialized"]);
    for i in 0..rows {
        r.push_row(vec![
            Cell::Float(1.0),
            Cell::Int(1 << (i + 4)),
            Cell::Float(0.5 / (i + 1) as f64),
            Cell::Text(r#"{"n":[1.5],"g":[1.0]}"#.into()),
        ]);
    }
    r
}

#[test]
fn empty_rows_give_header_only_csv() {
    assert_eq!(sample_report(0).to_csv().unwrap(), "t,n,error,target_serialized\n");
}

#[test]
fn one_row_gives_two_line_csv() {
    let csv = sample_report(1).to_csv().unwrap();
    assert_eq!(csv, "t,n,error,target_serialized\n1,16,0.5,\"{\"\"n\"\":[1.5],\"\"g\"\":[1.0]}\"\n");
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let record = reader.records().next().unwrap().unwrap();
    assert_eq!(&record[3], r#"{"n":[1.5],"g":[1.0]}"#);
}

#[test]
fn json_report_round_trips() {
    let report = sample_report(3);
    let text = report.to_json();
    let value: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&value).unwrap() + "\n", text);
    let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["experiment", "subject", "columns", "rows", "summary", "checks"]);
    assert_eq!(value["rows"][2]["n"], 64);
}

#[test]
fn floats_are_written_plainly() {
    use halflie::report::format_float;
    assert_eq!(format_float(0.25), "0.25");
    assert_eq!(format_float(1e-7), "1e-7");
    assert_eq!(format_float(f64::INFINITY), "inf");
    assert_eq!(format_float(0.0), "0");
}

#[test]
fn strong_trotter_rows_have_a_decreasing_tail() {
    let c = parse_config(&fs::read_to_string(configs_dir().join("strong_trotter_affine.json")).unwrap()).unwrap();
    let out = run_experiment(&c, ExperimentKind::StrongTrotter, &RunOptions::default()).unwrap();
    let r = &out.report;
    assert_eq!(r.columns, ["t", "n", "error", "target_serialized"]);
    let errors: Vec<f64> = r
        .rows
        .iter()
        .filter(|row| row[0] == Cell::Float(1.0))
        .map(|row| match row[2] {
            Cell::Float(e) => e,
            _ => unreachable!(),
        })
        .collect();
    assert_eq!(errors.len(), 9);
    assert!(errors[4..].windows(2).all(|w| w[1] < w[0]));
    assert!(r.all_passed());
    let target: Value = match &r.rows[0][3] {
        Cell::Text(s) => serde_json::from_str(s).unwrap(),
        _ => unreachable!(),
    };
    assert!((target["n"][0].as_f64().unwrap() - (0.5f64.exp() - 1.0)).abs() < 1e-13);
}

#[test]
fn commutator_ladder_reports_growth() {
    let dir = tempfile::tempdir().unwrap();
    let code = run_cli("commutator", &configs_dir().join("commutator_ladder.json"), dir.path(), &["--format", "json"]);
    assert_eq!(code, 0);
    let value: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("commutator.json")).unwrap()).unwrap();
    let exponent = value["summary"]["ladders"][0]["fitted_exponent"].as_f64().unwrap();
    assert!((exponent - 1.1).abs() < 0.1, "{exponent}");
    assert_eq!(value["rows"].as_array().unwrap().len(), 7);
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("commutator.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["report"], "commutator.json");
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn bounds_on_gl2_have_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_cli("bounds", &configs_dir().join("bounds_gl2.json"), dir.path(), &[]), 0);
    let text = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap(), vec!["claim", "samples", "max_slack", "violations"]);
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| &r[3] == "0"));
}

#[test]
fn instance_manifest_records_probe_residuals() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_cli("cocycle-smooth", &configs_dir().join("cocycle_smooth.json"), dir.path(), &["--seed", "3"]), 0);
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cocycle-smooth.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert!(manifest["probe"]["naturality"].as_f64().unwrap() < 1e-9);
    assert_eq!(manifest["config"]["instance"]["name"], "oscillator");
}

#[test]
fn svg_plot_has_one_series_per_time() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs_dir().join("strong_trotter_affine.json");
    assert_eq!(run_cli("strong-trotter", &config, dir.path(), &["--format", "svg"]), 0);
    let svg = fs::read_to_string(dir.path().join("strong-trotter.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        path
    };

    // Usage errors: missing file, invalid config, wrong subcommand, no svg for bounds.
    assert_eq!(run_cli("trotter", &dir.path().join("missing.json"), dir.path(), &[]), 1);
    assert_eq!(run_cli("trotter", &write("bad.json", r#"{ "tol": -1 }"#), dir.path(), &[]), 1);
    let declared = write("declared.json", &MINIMAL_TROTTER.replacen('{', r#"{ "experiment": "trotter","#, 1));
    assert_eq!(run_cli("commutator", &declared, dir.path(), &[]), 1);
    assert_eq!(run_cli("bounds", &configs_dir().join("bounds_gl2.json"), dir.path(), &["--format", "svg"]), 1);
    assert_eq!(execute(["halflie", "no-such-command"]), 1);

    assert_eq!(run_cli("trotter", &write("ok.json", MINIMAL_TROTTER), dir.path(), &[]), 0);

    // Expectation failure.
    let strict = MINIMAL_TROTTER.replacen('{', r#"{ "expect": { "max_final_error": 1e-12 },"#, 1);
    assert_eq!(run_cli("trotter", &write("strict.json", &strict), dir.path(), &[]), 2);

    // Refinement cannot reach an unattainable tolerance.
    let text = fs::read_to_string(configs_dir().join("evolve_conjugation.json")).unwrap();
    let unreachable = text.replace("\"tol\": 1e-10", "\"tol\": 1e-300");
    assert_eq!(run_cli("evolve", &write("unreachable.json", &unreachable), dir.path(), &[]), 3);
}

#[test]
fn jobs_do_not_change_output() {
    let config = configs_dir().join("seminorms_oscillator.json");
    let outputs: Vec<String> = ["1", "3"]
        .iter()
        .map(|jobs| {
            let dir = tempfile::tempdir().unwrap();
            assert_eq!(run_cli("seminorms", &config, dir.path(), &["--jobs", jobs]), 0);
            fs::read_to_string(dir.path().join("seminorms.csv")).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    let mut lines = outputs[0].lines();
    assert_eq!(lines.next(), Some("k,d,p_k"));
    assert_eq!(lines.count(), 25);
}

#[test]
fn emit_report_writes_named_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = emit_report(&sample_report(2), Format::Json, dir.path()).unwrap();
    assert_eq!(path.file_name().unwrap(), "trotter.json");
    assert!(emit_report(&sample_report(2), Format::Svg, dir.path()).is_err());
}
