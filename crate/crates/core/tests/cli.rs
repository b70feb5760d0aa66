use std::io::Write as _;
use std::path::PathBuf;
use std::process::Command;

use rac_core::classify::RiskLabel;
use rac_core::cli::{run_with_env, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK};
use rac_core::dataset::{AnnualSeries, MarketDataset};
use rac_core::report::{parse_export, parse_table, Format, InvestorType, Variant};

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn rac(args: &[&str]) -> Outcome {
    rac_env(args, None)
}

fn rac_env(args: &[&str], env: Option<PathBuf>) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("rac").chain(args.iter().copied());
    let code = run_with_env(argv, env, &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write_temp(dir: &tempfile::TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::File::create(&path)
        .unwrap()
        .write_all(contents.as_bytes())
        .unwrap();
    path
}

fn reference_csv_without(year: i32) -> String {
    let mut buf = Vec::new();
    MarketDataset::reference().write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    text.lines()
        .filter(|l| !l.starts_with(&format!("{year},")))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[test]
fn ingest_reports_span() {
    let o = rac(&["ingest"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.contains("90 years, 1889\u{2013}1978"), "{}", o.out);
}

#[test]
fn ingest_json_summary() {
    let o = rac(&["ingest", "--format", "json"]);
    assert_eq!(o.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    assert_eq!(v["years"], 90);
    assert_eq!(v["start_year"], 1889);
    assert_eq!(v["end_year"], 1978);
}

#[test]
fn missing_year_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(&dir, "gap.csv", &reference_csv_without(1900));
    let o = rac(&["ingest", "--dataset", path.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.err.contains("1900"), "{}", o.err);
}

#[test]
fn dataset_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(&dir, "gap.csv", &reference_csv_without(1950));
    let o = rac_env(&["ingest"], Some(path.clone()));
    assert_eq!(o.code, EXIT_INPUT);
    // an explicit flag wins over the environment
    let o = rac_env(&["ingest", "--dataset", "/nonexistent/file.csv"], Some(path));
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.err.contains("nonexistent"), "{}", o.err);
}

#[test]
fn unknown_flag_and_bad_values_are_input_errors() {
    assert_eq!(rac(&["classify", "--bogus"]).code, EXIT_INPUT);
    assert_eq!(rac(&["classify", "--group", "three"]).code, EXIT_INPUT);
    assert_eq!(rac(&["classify", "--beta", "1.5"]).code, EXIT_INPUT);
    assert_eq!(rac(&["classify", "--beta", "-0.5"]).code, EXIT_INPUT);
    assert_eq!(rac(&["classify", "--eta", "-1"]).code, EXIT_INPUT);
}

#[test]
fn help_exits_zero() {
    let o = rac(&["--help"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.out.contains("classify"));
}

#[test]
fn calibrate_without_rho_explains_unidentified_rho() {
    let o = rac(&["calibrate", "--variant", "realized"]);
    assert_eq!(o.code, EXIT_NUMERICAL);
    assert!(o.err.contains("inconsistent system"), "{}", o.err);
    assert!(o.err.contains("--rho"), "{}", o.err);
}

#[test]
fn calibrate_with_rho_reports_factors() {
    let o = rac(&[
        "calibrate",
        "--rho",
        "1.033526",
        "--variant",
        "realized",
        "--format",
        "json",
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let v: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    let zeta = v[0]["zeta"].as_f64().unwrap();
    let xi = v[0]["xi"].as_f64().unwrap();
    assert!((zeta - 0.961745).abs() < 1e-2);
    assert!((xi - 1.019392).abs() < 1e-2);
}

#[test]
fn degenerate_dataset_is_a_numerical_error() {
    // constant consumption: zero growth, zero variance, gap exactly zero
    let n = 10;
    let d = MarketDataset::new(
        AnnualSeries::new(1900, vec![100.0; n]).unwrap(),
        AnnualSeries::new(1900, vec![1.05; n]).unwrap(),
        AnnualSeries::new(1900, vec![1.01; n]).unwrap(),
    )
    .unwrap();
    let mut buf = Vec::new();
    d.write_csv(&mut buf).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(&dir, "flat.csv", &String::from_utf8(buf).unwrap());
    let o = rac(&[
        "calibrate",
        "--dataset",
        path.to_str().unwrap(),
        "--beta",
        "1.0",
        "--variant",
        "realized",
    ]);
    assert_eq!(o.code, EXIT_NUMERICAL);
    assert!(o.err.contains("degenerate"), "{}", o.err);
}

#[test]
fn classify_text_has_one_table_per_investor() {
    let o = rac(&["classify"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.contains(InvestorType::Equity.heading()));
    assert!(o.out.contains(InvestorType::RiskFree.heading()));
    assert!(o.out.contains("1978 (realized)"));
    assert!(o.out.contains("1978 (projected)"));
    assert!(o.out.contains("Risk-averse"));
    assert!(o.out.contains("Not enough risk-loving"));
}

#[test]
fn classify_csv_parses_back() {
    let o = rac(&["classify", "--format", "csv"]);
    assert_eq!(o.code, EXIT_OK);
    let rows = parse_table(o.out.as_bytes(), Format::Csv).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r.certain_utility > r.uncertain_utility);
    }
}

#[test]
fn classify_json_export() {
    let o = rac(&["classify", "--format", "json"]);
    assert_eq!(o.code, EXIT_OK);
    let docs = parse_export(o.out.as_bytes()).unwrap();
    assert_eq!(docs.len(), 2);
    assert_eq!(docs[0].variant, Variant::Realized);
    assert_eq!(docs[1].variant, Variant::Projected);
    for doc in &docs {
        assert_eq!(doc.classifications.len(), 2);
        assert_eq!(doc.classifications[0].label_text, RiskLabel::RiskAverse.as_str());
        assert_eq!(
            doc.classifications[1].label_text,
            RiskLabel::NotEnoughRiskLoving.as_str()
        );
    }
}

#[test]
fn eta_of_one_is_unclassifiable() {
    let o = rac(&["classify", "--eta", "1.0"]);
    assert_eq!(o.code, EXIT_NUMERICAL);
    assert!(o.err.contains("unclassifiable"), "{}", o.err);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_temp(&dir, "rac.toml", "variant = \"realized\"\nformat = \"csv\"\n");
    let cfg = cfg.to_str().unwrap();
    let o = rac(&["classify", "--config", cfg]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert_eq!(parse_table(o.out.as_bytes(), Format::Csv).unwrap().len(), 2);

    let o = rac(&["classify", "--config", cfg, "--variant", "both"]);
    assert_eq!(parse_table(o.out.as_bytes(), Format::Csv).unwrap().len(), 4);

    let bad = write_temp(&dir, "bad.toml", "unknown_key = 1\n");
    assert_eq!(rac(&["classify", "--config", bad.to_str().unwrap()]).code, EXIT_INPUT);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_rac");
    let ok = Command::new(bin)
        .arg("classify")
        .env_remove("RAC_DATASET")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert_eq!(ok.stdout, rac(&["classify"]).out.into_bytes());

    let numerical = Command::new(bin)
        .args(["classify", "--eta", "1"])
        .env_remove("RAC_DATASET")
        .output()
        .unwrap();
    assert_eq!(numerical.status.code(), Some(EXIT_NUMERICAL));

    let input = Command::new(bin)
        .arg("ingest")
        .env("RAC_DATASET", "/nonexistent/rac.csv")
        .output()
        .unwrap();
    assert_eq!(input.status.code(), Some(EXIT_INPUT));
}
