use clap::Parser;
use lnadist::cli::{exit_code, run, Cli};
use lnadist::report::{read_csv, read_json, CoeffRow, Manifest, RateRow};

fn cli(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("lnadist").chain(args.iter().copied())).unwrap()
}

#[test]
fn coeffs_writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = run(&cli(&["coeffs", "--out", out, "--seed", "5"]));
    assert_eq!(exit_code(&r), 0);
    let rows: Vec<CoeffRow> = read_csv(&dir.path().join("coeffs.csv")).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].rel_error.is_some());
    let m: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.seed, 5);
    assert_eq!(m.config_hash.len(), 64);
    assert!(m.files.contains(&"plot.gp".to_string()));
    let text = std::fs::read_to_string(dir.path().join("coeffs.csv")).unwrap();
    assert!(text.starts_with("degree,b_re,b_im,a_re,a_im,"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"rate": {"antenas": [1]}}"#).unwrap();
    let r = run(&cli(&["rate", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]));
    assert_eq!(exit_code(&r), 2);
    let wrong = dir.path().join("wrong.json");
    std::fs::write(&wrong, r#"{"command": "pulses"}"#).unwrap();
    assert_eq!(exit_code(&run(&cli(&["coeffs", "--config", wrong.to_str().unwrap()]))), 2);
    assert!(Cli::try_parse_from(["lnadist", "bogus"]).is_err());
}

#[test]
fn oversized_rate_run_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfgp = dir.path().join("big.json");
    std::fs::write(&cfgp, r#"{"rate": {"antennas": [1024], "symbols": 100000000, "channel_types": ["los"], "blocker_db": [70]}}"#).unwrap();
    let r = run(&cli(&["rate", "--config", cfgp.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]));
    match &r {
        Err(lnadist::Error::Config(msg)) => assert!(msg.contains("reduce")),
        other => panic!("{other:?}"),
    }
    assert_eq!(exit_code(&r), 2);
}

#[test]
fn rate_json_round_trip_and_thread_independence() {
    let dir = tempfile::tempdir().unwrap();
    let cfgp = dir.path().join("r.json");
    std::fs::write(
        &cfgp,
        r#"{"rate": {"antennas": [1, 4], "symbols": 1000, "realizations": 2, "channel_types": ["los"], "blocker_db": [70]}}"#,
    )
    .unwrap();
    let mut tables = Vec::new();
    for t in ["1", "3"] {
        let out = dir.path().join(format!("t{t}"));
        let r = run(&cli(&["rate", "--config", cfgp.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", t, "--json"]));
        assert_eq!(exit_code(&r), 0);
        let rows: Vec<RateRow> = read_json(&out.join("rate.json")).unwrap();
        tables.push(rows);
    }
    assert_eq!(tables[0], tables[1]);
    assert_eq!(tables[0].len(), 2);
}

#[test]
fn validate_mutation_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(exit_code(&run(&cli(&["validate", "--quick", "--out", out]))), 0);
    assert_eq!(exit_code(&run(&cli(&["validate", "--quick", "--drop-factor-two", "--out", out]))), 1);
}

#[test]
fn pulses_and_array_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfgp = dir.path().join("c.json");
    std::fs::write(
        &cfgp,
        r#"{"pulses": {"users": 3, "span": 16, "max_lag": 4},
            "array": {"antennas": 16, "deviation_draws": 300,
                      "scenario": {"antennas": 16, "angles_deg": [0, 20, -40], "powers_db": [0, 3, 40]}}}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    for c in ["pulses", "array"] {
        let r = run(&cli(&[c, "--config", cfgp.to_str().unwrap(), "--out", out.to_str().unwrap()]));
        assert_eq!(exit_code(&r), 0, "{c}: {r:?}");
    }
    for f in ["ambiguity.csv", "spectra.csv", "census.csv", "array_gain.csv", "regimes.csv", "distortion.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}
