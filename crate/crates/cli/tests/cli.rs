use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use recnum::experiments::ExperimentConfig;
use recnum::grammar::DmPair;
use recnum::lexicon::brute_force_lmin;
use recnum::metrics::NeedDistribution;
use recnum::report::sig12;
use serde_json::Value;

const SMALL: &str = r#"{
  "ga": {"population_size": 30, "generations": 5},
  "agent": {"hidden_dim": 4, "embedding_dim": 3},
  "evolution": {"max_steps": 2, "inner_iterations": 5, "pretrain_epochs": 3}
}"#;

fn recnum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recnum")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_line(o: &Output) -> Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    let line = text.lines().last().expect("an error line");
    serde_json::from_str(line).expect("error line is JSON")
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.json");
    fs::write(&path, SMALL).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn analyze_english() {
    let o = recnum(&["analyze", "--D", "1,2,3,4,5,6,7,8,9,11", "--M", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("lexicon_size 11\n"));
    let rows: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("n,")).skip(1).collect();
    assert_eq!(rows.len(), 99);
    assert_eq!(rows[0], "1,1,1");
    assert_eq!(rows[9], "10,1*10,3");
}

#[test]
fn analyze_matches_brute_force_average() {
    let o = recnum(&["analyze", "--D", "1..11", "--M", "12"]);
    assert!(o.status.success());
    let dm = DmPair::new(1..=11, [12], 99).unwrap();
    let brute = brute_force_lmin(&dm, 7).unwrap();
    let dist = NeedDistribution::new(99);
    let expected = dist.expectation(brute.complexities().into_iter().map(|c| c as f64));
    assert!(stdout(&o).contains(&format!("avg_ms_complexity {}\n", sig12(expected))));
}

#[test]
fn analyze_reports_uncovered_numerals() {
    let o = recnum(&["analyze", "--D", "2", "--M", "3", "--support", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_line(&o);
    assert_eq!(e["error"], "coverage");
    assert!(e["message"].as_str().unwrap().ends_with("1,3,5,7,9"));
}

#[test]
fn usage_errors_are_json() {
    for args in [&["frobnicate"][..], &["analyze", "--D", "1..x"], &["evolve"], &["evolve", "--start", "9"]] {
        let o = recnum(args);
        assert!(!o.status.success(), "{args:?}");
        assert_eq!(error_line(&o)["error"], "usage", "{args:?}");
    }
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"seed": "one"}"#).unwrap();
    let o = recnum(&["--config", path.to_str().unwrap(), "gradcheck"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "experiment");
}

#[test]
fn pareto_is_reproducible_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = recnum(&["--config", &config, "--seed", "5", "--out", out.to_str().unwrap(), "pareto", "--human"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let csv = fs::read(a.join("frontier.csv")).unwrap();
    assert_eq!(csv, fs::read(b.join("frontier.csv")).unwrap());

    let text = String::from_utf8(csv).unwrap();
    let avgs: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(!avgs.is_empty());
    assert!(avgs.windows(2).all(|w| w[1] < w[0]));

    let echoed = ExperimentConfig::from_json(&fs::read_to_string(a.join("config.json")).unwrap()).unwrap();
    assert_eq!(echoed.seed, 5);
    assert_eq!(echoed.ga.population_size, 30);
    assert_eq!(echoed.output_dir, a);

    let svg = fs::read_to_string(a.join("frontier.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), avgs.len() + 3);
}

#[test]
fn pareto_overlay_of_a_frontier_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let overlay = dir.path().join("humans.csv");
    fs::write(&overlay, "lexicon_size,avg_ms_complexity,D,M\n11,1.19,1;2;3;4;5;6;7;8;9;11,10\n6,1.6,1;2;3;4,5;10\n")
        .unwrap();
    let out = dir.path().join("o");
    let o = recnum(&[
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "pareto",
        "--overlay",
        overlay.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let frontier_rows = fs::read_to_string(out.join("frontier.csv")).unwrap().lines().count() - 1;
    let svg = fs::read_to_string(out.join("frontier.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), frontier_rows + 2);
    assert!(svg.contains(">humans<"));
}

#[test]
fn evolve_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = recnum(&["--config", &config, "--seed", "3", "--out", out.to_str().unwrap(), "evolve", "--start", "2"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out.join("trajectory.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "step,lexicon_size,avg_ms_complexity,D,M,q_current,q_alt,accuracy,mutation");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,7,"));
    assert!(lines[1].contains(",1;4;7;8;15,10;33,"));
    assert!(dir.path().join("a/trajectory.svg").exists());
}

#[test]
fn evolve_zero_steps_from_row_seven() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = dir.path().join("z");
    let o = recnum(&[
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "evolve",
        "--start",
        "7",
        "--max-steps",
        "0",
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].contains(",1;4;12,9;25,"));
}

#[test]
fn evolve_rejects_uncovering_start() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = dir.path().join("x");
    let o = recnum(&["--config", &config, "--out", out.to_str().unwrap(), "evolve", "--D", "2", "--M", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(error_line(&o)["message"].as_str().unwrap().contains("cover"));
}

#[test]
fn report_m_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let frontier = dir.path().join("f.csv");
    fs::write(&frontier, "lexicon_size,avg_ms_complexity,D,M\n3,2.5,1;2,3\n12,1.2,1;2;3;4;5;6;7;8;9;10;11,12\n")
        .unwrap();
    let out = dir.path().join("m");
    let o = recnum(&["--out", out.to_str().unwrap(), "report-m", frontier.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "m_cardinality,count\n1,2\n");
    assert!(out.join("m_cardinality.svg").exists());

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "lexicon_size,avg_ms_complexity,D,M\n").unwrap();
    let o = recnum(&["--out", out.to_str().unwrap(), "report-m", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "csv");
}

#[test]
fn gradcheck_passes() {
    let o = recnum(&["gradcheck", "--seeds", "1,2"]);
    assert!(o.status.success());
    let reports: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r["max_relative_error"].as_f64().unwrap() < 1e-4));
}
