//! Command-level behaviour: headers, round-trips, determinism, error paths.

use compound_levy_cli::commands::{
    cmd_aggregate, cmd_eval, cmd_simulate, cmd_study, cmd_truncate, cmd_var, CommandError,
    OutputFormat,
};
use compound_levy_cli::config::RunConfig;
use compound_levy_cli::output::{fmt_g17, parse_csv, CsvTable};

fn load(name: &str) -> RunConfig {
    let path = format!("{}/../../configs/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    RunConfig::from_json(&text).unwrap()
}

#[test]
fn eval_header_reports_truncation() {
    let out = cmd_eval(&load("poisson_levy_low"), OutputFormat::Csv).unwrap();
    let (meta, rows) = parse_csv(&out);
    let find = |k: &str| meta.iter().find(|(key, _)| key == k).unwrap().1.clone();
    assert_eq!(find("n_upper"), "11");
    assert_eq!(find("n_lower"), "1");
    assert_eq!(rows.len(), 200);
}

#[test]
fn eval_single_point_at_zero_is_the_atom() {
    let mut cfg = load("poisson_levy_low");
    cfg.grid = Some(compound_levy_cli::config::GridConfig::Explicit(vec![0.0]));
    let out = cmd_eval(&cfg, OutputFormat::Csv).unwrap();
    let (_, rows) = parse_csv(&out);
    assert_eq!(rows.len(), 1);
    let atom: f64 = (-0.1f64).exp();
    assert!((rows[0][2] - atom).abs() < 1e-15);
}

#[test]
fn eval_output_reparse_reemit_identical() {
    let out = cmd_eval(&load("neg_binomial_levy_low"), OutputFormat::Csv).unwrap();
    let (meta, rows) = parse_csv(&out);
    let mut t = CsvTable::new();
    for (k, v) in &meta {
        if k == "zero_prob" {
            t.meta_f64(k, v.parse().unwrap());
        } else {
            t.meta(k, v);
        }
    }
    t.header(&["z", "pdf", "cdf"]);
    for r in &rows {
        t.row(r);
    }
    assert_eq!(t.finish(), out);
}

#[test]
fn var_rows_present_and_monotone() {
    let out = cmd_var(&load("poisson_levy_high"), OutputFormat::Csv).unwrap();
    let (_, rows) = parse_csv(&out);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().any(|r| r[0] == 0.995));
    assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1]));
}

#[test]
fn var_below_atom_is_zero() {
    let mut cfg = load("poisson_levy_low");
    // atom = e^{-0.1} = 0.9048...; 0.5 sits inside it.
    cfg.quantiles = vec![0.5];
    let out = cmd_var(&cfg, OutputFormat::Csv).unwrap();
    let (_, rows) = parse_csv(&out);
    assert_eq!(rows[0][1], 0.0);
}

#[test]
fn truncate_reference_targets() {
    for (name, expect) in [
        ("poisson_levy_low", 11u64),
        ("poisson_levy_high", 49),
        ("neg_binomial_levy_low", 19),
        ("neg_binomial_levy_high", 120),
        ("binomial_levy_low", 12),
        ("binomial_levy_high", 12),
    ] {
        let out = cmd_truncate(&load(name), OutputFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["n_upper"].as_u64(), Some(expect), "{name}");
        assert!(v["mass_dropped"].as_f64().unwrap() <= 1e-10, "{name}");
    }
}

#[test]
fn simulate_same_seed_identical() {
    let mut cfg = load("poisson_levy_low");
    cfg.years = Some(20_000);
    cfg.block_size = Some(5_000);
    cfg.grid = Some(compound_levy_cli::config::GridConfig::Range {
        start: 1.0,
        stop: 50.0,
        points: 25,
    });
    let a = cmd_simulate(&cfg, OutputFormat::Csv).unwrap();
    let b = cmd_simulate(&cfg, OutputFormat::Csv).unwrap();
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.seed = Some(43);
    assert_ne!(cmd_simulate(&other, OutputFormat::Csv).unwrap(), a);
}

#[test]
fn study_mse_nonincreasing_beyond_mode() {
    let mut cfg = load("poisson_levy_high");
    cfg.caps = Some(compound_levy_cli::config::CapsConfig::Range { start: 10, stop: 60 });
    let out = cmd_study(&cfg, OutputFormat::Csv).unwrap();
    let (_, rows) = parse_csv(&out);
    assert_eq!(rows.len(), 51);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1] + 1e-18));
}

#[test]
fn aggregate_reports_diagnostics_and_var() {
    let out = cmd_aggregate(&load("aggregate_poisson"), OutputFormat::Json).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    // atom = e^{-10.1}
    let atom = v["atom"].as_f64().unwrap();
    assert!((atom - (-10.1f64).exp()).abs() < 1e-15);
    assert_eq!(v["components"].as_u64(), Some((11 + 1) * (49 + 1) - 1));
    assert_eq!(v["rows"].as_array().unwrap().len(), 200);
    assert_eq!(v["var"].as_array().unwrap().len(), 4);
}

#[test]
fn aggregate_budget_error_suggests_reduction() {
    let mut cfg = load("aggregate_poisson");
    cfg.budget = Some(10);
    match cmd_aggregate(&cfg, OutputFormat::Csv) {
        Err(CommandError::Config(e)) => {
            let msg = e.to_string();
            assert!(msg.contains("budget"), "{msg}");
            assert!(msg.contains("reduce"), "{msg}");
        }
        other => panic!("expected budget error, got {other:?}"),
    }
}

#[test]
fn aggregate_requires_two_cells() {
    let mut cfg = load("aggregate_poisson");
    cfg.models.truncate(1);
    assert!(matches!(
        cmd_aggregate(&cfg, OutputFormat::Csv),
        Err(CommandError::Config(_))
    ));
}

#[test]
fn g17_meta_round_trip() {
    let x = 0.2824295364810001;
    assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
}

#[test]
fn all_shipped_configs_parse_and_pass_mass_checks() {
    for name in [
        "binomial_levy_low",
        "binomial_beta_levy_low",
        "neg_binomial_levy_low",
        "neg_binomial_beta_levy_low",
        "poisson_levy_low",
        "poisson_gamma_levy_low",
        "binomial_levy_high",
        "binomial_beta_levy_high",
        "neg_binomial_levy_high",
        "neg_binomial_beta_levy_high",
        "poisson_levy_high",
        "poisson_gamma_levy_high",
    ] {
        let cfg = load(name);
        let out = cmd_truncate(&cfg, OutputFormat::Json).unwrap_or_else(|e| panic!("{name}: {e}"));
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["mass_dropped"].as_f64().unwrap() <= 1e-9, "{name}");
    }
}
