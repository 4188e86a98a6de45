use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use wbr_cli::{run, CliError};

fn manifest(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn wbr(args: &[&str]) -> Result<String, CliError> {
    let mut out = Vec::new();
    run(std::iter::once("wbr").chain(args.iter().copied()), &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn out_dir(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn csv_column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn shipped_sample_panel_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "m");
    let panel = manifest("data/sample_panel.csv");
    let log = wbr(&["metrics", "--panel", panel.to_str().unwrap(), "--svg", "--changes", "--out", &out]).unwrap();
    assert!(log.contains("metrics.csv"));
    let report = fs::read_to_string(tmp.path().join("m/metrics.csv")).unwrap();
    // 19 rounds x 3 priors x (3 metrics + raw KL).
    assert_eq!(report.lines().count(), 1 + 19 * 3 * 4);
    for f in ["metrics.svg", "changes/pairwise_changes.csv", "changes/change_histogram.svg"] {
        assert!(tmp.path().join("m").join(f).exists(), "{f}");
    }
}

#[test]
fn rational_panel_has_zero_dirac_distance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "m");
    wbr(&["metrics", "--synth", "rational", "--out", &out]).unwrap();
    let text = fs::read_to_string(tmp.path().join("m/metrics.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| l.contains(",optimalDirac,wasserstein,")).collect();
    assert_eq!(rows.len(), 19);
    assert!(rows.iter().all(|l| l.ends_with(",0.0")));
}

#[test]
fn sticky_drift_metrics_match_golden_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "m");
    wbr(&["metrics", "--synth", "stickyDrift", "--seed", "7", "--out", &out]).unwrap();
    let got = fs::read_to_string(tmp.path().join("m/metrics.csv")).unwrap();
    let golden = manifest("tests/data/golden_sticky_metrics.csv");
    if std::env::var_os("WBR_BLESS").is_some() {
        fs::create_dir_all(golden.parent().unwrap()).unwrap();
        fs::write(&golden, &got).unwrap();
    }
    assert_eq!(got, fs::read_to_string(golden).unwrap());
}

#[test]
fn sweep_limits_and_monotone_cost() {
    let tmp = tempfile::tempdir().unwrap();
    let zero = out_dir(tmp.path(), "zero");
    wbr(&["sweep", "--lambdas", "0", "--out", &zero]).unwrap();
    let text = fs::read_to_string(tmp.path().join("zero/sweep.csv")).unwrap();
    assert!(csv_column(&text, "meanContribution").iter().all(|v| v == "0.0"));

    let big = out_dir(tmp.path(), "big");
    wbr(&["sweep", "--lambdas", "1e6", "--prior", "dirac:20", "--out", &big]).unwrap();
    let text = fs::read_to_string(tmp.path().join("big/sweep.csv")).unwrap();
    assert!(csv_column(&text, "meanContribution").iter().all(|v| v == "20.0"));

    let grid = out_dir(tmp.path(), "grid");
    wbr(&["sweep", "--lambdas", "0,0.5,2,1e6", "--cost", "wasserstein:abs:2", "--out", &grid]).unwrap();
    let text = fs::read_to_string(tmp.path().join("grid/sweep.csv")).unwrap();
    let rounds = csv_column(&text, "round");
    let cost: Vec<f64> = csv_column(&text, "infoCost").iter().map(|v| v.parse().unwrap()).collect();
    for r in 1..=20 {
        let per: Vec<f64> = rounds
            .iter()
            .zip(&cost)
            .filter(|(x, _)| x.parse::<usize>().unwrap() == r)
            .map(|(_, c)| *c)
            .collect();
        assert_eq!(per.len(), 4);
        assert!(per.windows(2).all(|w| w[1] <= w[0] + 1e-9), "round {r}: {per:?}");
    }
}

#[test]
fn dumped_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "a");
    let flags = [
        "sweep", "--lambdas", "0.1,1", "--seeds", "3,4", "--cost", "wasserstein:abs:2",
        "--schedule", "previous", "--episodes", "2", "--rounds", "8", "--out", &out,
    ];
    wbr(&flags).unwrap();
    let mut dump_flags = flags.to_vec();
    dump_flags.push("--dump-config");
    let dumped = wbr(&dump_flags).unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, &dumped).unwrap();
    let other = out_dir(tmp.path(), "b");
    wbr(&["sweep", "--config", cfg.to_str().unwrap(), "--out", &other]).unwrap();
    let a = fs::read(tmp.path().join("a/sweep.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/sweep.csv")).unwrap();
    assert_eq!(a, b);
    // Reloading and dumping again is a fixed point.
    let again = wbr(&["sweep", "--config", cfg.to_str().unwrap(), "--dump-config"]).unwrap();
    assert_eq!(again, dumped);
}

#[test]
fn config_sections_apply_per_command() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    let out = out_dir(tmp.path(), "syn");
    fs::write(
        &cfg,
        format!("[synth]\ngenerator = \"rational\"\nsubjects = 4\nrounds = 3\nout = {out:?}\n\n[sweep]\nlambdas = [0.0]\n"),
    )
    .unwrap();
    wbr(&["synth", "--config", cfg.to_str().unwrap()]).unwrap();
    let panel = fs::read_to_string(tmp.path().join("syn/panel.csv")).unwrap();
    assert_eq!(panel.lines().count(), 1 + 12);
    fs::write(&cfg, "[synth]\nflavour = 1\n").unwrap();
    assert!(matches!(wbr(&["synth", "--config", cfg.to_str().unwrap()]), Err(CliError::Validation(_))));
}

fn best_response(args: &[&str]) -> Value {
    let mut all = vec!["bestresponse"];
    all.extend_from_slice(args);
    serde_json::from_str(&wbr(&all).unwrap()).unwrap()
}

fn mass(v: &Value) -> Vec<f64> {
    v["policy"]["mass"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn best_response_examples_end_to_end() {
    let v = best_response(&["--utilities", "3,1,3,2", "--cost", "kl", "--lambda", "0"]);
    assert_eq!(mass(&v), vec![1.0, 0.0, 0.0, 0.0]);

    let v = best_response(&["--utilities", "0,0,0,0,1", "--cost", "wasserstein:abs:1", "--lambda", "0.5"]);
    for (a, b) in mass(&v).iter().zip([0.2, 0.2, 0.2, 0.0, 0.4]) {
        assert!((a - b).abs() < 1e-12);
    }

    let v = best_response(&["--utilities", "1,0", "--cost", "entropy", "--lambda", "1"]);
    assert!((mass(&v)[0] - 0.7311).abs() < 1e-4);

    let v = best_response(&["--utilities", "0.5,-1,2", "--prior", "custom:0.2,0.3,0.5", "--cost", "wasserstein", "--lambda", "1e6"]);
    for (a, b) in mass(&v).iter().zip([0.2, 0.3, 0.5]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn utilities_file_input() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("u.txt");
    fs::write(&f, "0 0\n0, 0 1\n").unwrap();
    let v = best_response(&["--utilities-file", f.to_str().unwrap(), "--lambda", "0.5"]);
    assert_eq!(mass(&v).len(), 5);
    fs::write(&f, "0 x").unwrap();
    assert!(matches!(
        wbr(&["bestresponse", "--utilities-file", f.to_str().unwrap()]),
        Err(CliError::Validation(_))
    ));
}

#[test]
fn simulate_writes_history_and_policies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "sim");
    wbr(&["simulate", "--episodes", "2", "--opponents", "uniform", "--lambda", "0", "--out", &out]).unwrap();
    let hist = fs::read_to_string(tmp.path().join("sim/history.csv")).unwrap();
    assert_eq!(hist.lines().count(), 1 + 2 * 20 * 4);
    let pol = fs::read_to_string(tmp.path().join("sim/policies.csv")).unwrap();
    assert!(csv_column(&pol, "meanContribution").iter().all(|v| v == "0.0"));
    let json_out = out_dir(tmp.path(), "simj");
    wbr(&["simulate", "--format", "json", "--out", &json_out]).unwrap();
    let v: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("simj/policies.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 80);
}

fn exit_code(args: &[&str], cwd: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wbr")).args(args).current_dir(cwd).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(exit_code(&["synth", "--subjects", "2", "--rounds", "2"], dir).0, 0);
    assert_eq!(exit_code(&["--help"], dir).0, 0);
    assert_eq!(exit_code(&["sweep", "--no-such-flag"], dir).0, 1);
    assert_eq!(exit_code(&["sweep", "--lambdas=-1"], dir).0, 1);
    assert_eq!(exit_code(&["metrics", "--panel", "missing.csv"], dir).0, 1);

    fs::write(dir.join("bad.csv"), "subject,group,round,contribution\na,1,1,3\na,1,2,41\n").unwrap();
    let (code, err) = exit_code(&["metrics", "--panel", "bad.csv"], dir);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");

    // An output path that is a regular file cannot become a directory.
    fs::write(dir.join("blocker"), "").unwrap();
    assert_eq!(exit_code(&["synth", "--out", "blocker"], dir).0, 2);
}
