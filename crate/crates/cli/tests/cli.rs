use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn tamp(args: &[&str], paths: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tamp"));
    cmd.args(args);
    for (flag, path) in paths {
        cmd.arg(flag).arg(path);
    }
    cmd.output().unwrap()
}

fn two_cups() -> Vec<(&'static str, PathBuf)> {
    vec![
        ("--scene", fixture("two_cups.json")),
        ("--world", fixture("two_cups.world.json")),
        ("--mission", fixture("two_cups.mission.json")),
    ]
}

fn refs<'a>(v: &'a [(&'static str, PathBuf)]) -> Vec<(&'static str, &'a Path)> {
    v.iter().map(|(f, p)| (*f, p.as_path())).collect()
}

#[test]
fn check_exit_codes() {
    let scene = fixture("two_cups.json");
    let ok = tamp(
        &["check"],
        &[("--scene", &scene), ("--plan", &fixture("two_cups.plan.json"))],
    );
    assert_eq!(ok.status.code(), Some(0));

    let bad = tamp(
        &["check"],
        &[("--scene", &scene), ("--plan", &fixture("two_cups.bad_plan.json"))],
    );
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8_lossy(&bad.stdout);
    assert!(text.starts_with("action 1: precondition"), "{text}");

    let missing = tamp(
        &["check"],
        &[("--scene", Path::new("/nonexistent.json")), ("--plan", &scene)],
    );
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn run_writes_report_csv_plot_and_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv, plot, ledger) = (
        dir.path().join("r.json"),
        dir.path().join("r.csv"),
        dir.path().join("r.svg"),
        dir.path().join("l.json"),
    );
    let mut paths = two_cups();
    paths.extend([
        ("--out", out.clone()),
        ("--csv", csv.clone()),
        ("--plot", plot.clone()),
        ("--ledger-out", ledger.clone()),
    ]);
    let o = tamp(&["run", "--algo", "reactive", "--seed", "2"], &refs(&paths));
    assert!(o.status.success(), "{o:?}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["algorithm"], "reactive");
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
    assert!(std::fs::read_to_string(&plot).unwrap().starts_with("<svg"));

    // the learned ledger feeds the next run, which then delivers the easy cup
    let warm = dir.path().join("warm.json");
    let mut paths = two_cups();
    paths.extend([("--ledger-in", ledger), ("--out", warm.clone())]);
    let o = tamp(&["run", "--algo", "inter", "--seed", "2"], &refs(&paths));
    assert!(o.status.success(), "{o:?}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&warm).unwrap()).unwrap();
    assert_eq!(report["rows"][0]["object"], "cup_2");
    assert_eq!(report["rows"][0]["fulfilled"], true);
}

#[test]
fn run_rejects_unknown_algorithm_and_bad_input() {
    let paths = two_cups();
    let o = tamp(&["run", "--algo", "greedy"], &refs(&paths));
    assert_ne!(o.status.code(), Some(0));

    let mut broken = two_cups();
    broken[2].1 = fixture("two_cups.json");
    let o = tamp(&["run"], &refs(&broken));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn estimate_prints_a_breakdown() {
    let o = tamp(
        &["estimate"],
        &[
            ("--scene", &fixture("two_cups.json")),
            ("--world", &fixture("two_cups.world.json")),
            ("--plan", &fixture("two_cups.plan.json")),
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["nav_estimates"].as_array().unwrap().len(), 2);
    assert_eq!(v["man_estimates"].as_array().unwrap().len(), 2);
    assert!(v["total"].as_f64().unwrap() > 0.0);
}

#[test]
fn generate_then_bench_a_directory_suite() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite");
    for seed in ["3", "4"] {
        let o = tamp(
            &["generate", "--seed", seed],
            &[("--out", &suite.join(format!("s{seed}")))],
        );
        assert!(o.status.success(), "{o:?}");
    }
    for f in ["scene.json", "world.json", "mission.json"] {
        assert!(suite.join("s3").join(f).is_file());
    }
    let out = dir.path().join("bench");
    let o = tamp(
        &["bench", "--algos", "inter,openloop", "--seeds", "1,2"],
        &[("--suite", &suite), ("--out", &out)],
    );
    assert!(o.status.success(), "{o:?}");
    let mut reader = csv::Reader::from_path(out.join("aggregate.csv")).unwrap();
    assert_eq!(reader.records().count(), 2 * 2 * 2);
    for algo in ["inter_llm", "open_loop"] {
        for seed in [1, 2] {
            assert!(out.join("s4").join(format!("{algo}_seed{seed}.json")).is_file());
        }
    }
}

#[test]
fn plot_overlays_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for algo in ["inter", "openloop"] {
        let out = dir.path().join(format!("{algo}.json"));
        let mut paths = two_cups();
        paths.push(("--out", out.clone()));
        assert!(tamp(&["run", "--algo", algo], &refs(&paths)).status.success());
        reports.push(out);
    }
    let svg = dir.path().join("plot.svg");
    let o = Command::new(env!("CARGO_BIN_EXE_tamp"))
        .arg("plot")
        .arg("--out")
        .arg(&svg)
        .args(&reports)
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 2);
}
