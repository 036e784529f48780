use std::path::Path;
use std::process::{Command, Output};

use hypermine_cli::config::ExperimentConfig;
use hypermine_cli::EvaluationRun;

fn hypermine(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypermine"))
        .args(args)
        .current_dir(dir)
        .env("HYPERMINE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Two loose clusters of 12 nodes joined by one hyperedge.
fn clustered(dir: &Path) {
    let mut text = String::new();
    for b in 0..2 {
        for s in 0..12 {
            let v = |k: usize| format!("n{}", b * 12 + (s + k) % 12);
            text.push_str(&format!("{} {} {}\n", v(0), v(1), v(3)));
            text.push_str(&format!("{} {}\n", v(0), v(5)));
        }
    }
    text.push_str("n0 n12\n");
    std::fs::write(dir.join("g.txt"), text).unwrap();
    let labels: String = (0..24).map(|i| format!("n{i} c{}\n", i / 12)).collect();
    std::fs::write(dir.join("g.labels"), labels).unwrap();
}

fn toy(dir: &Path) {
    std::fs::write(dir.join("toy.txt"), "a b\nb c\n").unwrap();
}

#[test]
fn linkpred_on_toy_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let out = hypermine(
        dir.path(),
        &["linkpred", "--data", "toy.txt", "--algo", "hra", "--folds", "2", "--seed", "42", "--out", "res/lp.json"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let run = EvaluationRun::read(&dir.path().join("res/lp.json")).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("res/lp.csv")).unwrap();
    assert_eq!(csv, run.headline.to_csv());
    assert_eq!(run.units.len(), 1);
    assert_eq!(run.config.seeds, vec![42]);
    assert_eq!(run.dataset_sha256.len(), 64);
    assert!(!dir.path().join("res/lp.checkpoint.jsonl").exists());
}

#[test]
fn community_reports_one_row_per_method() {
    let dir = tempfile::tempdir().unwrap();
    clustered(dir.path());
    let out = hypermine(
        dir.path(),
        &[
            "community", "--data", "g.txt", "--labels", "g.labels", "--algo", "hra,hsc,nmf,ndp", "--seeds", "0..2",
            "--out", "cd.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("cd.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for (row, algo) in rows.iter().zip(["hra", "hsc", "nmf", "ndp"]) {
        assert!(row.starts_with(&format!("{algo},2,3,")), "{row}");
    }
    let assignments = std::fs::read_to_string(dir.path().join("cd.assignments.csv")).unwrap();
    assert_eq!(assignments.lines().count(), 1 + 24 * 4 * 3);
}

#[test]
fn vital_csv_is_node_by_measure() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let out = hypermine(dir.path(), &["vital", "--data", "toy.txt", "--measures", "hra,hdc", "--out", "c.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(csv, "node,hra,hdc\na,0.375,1\nb,2,2\nc,0.375,1\n");
}

#[test]
fn relative_beta_gives_a_tau_curve_per_measure() {
    let dir = tempfile::tempdir().unwrap();
    clustered(dir.path());
    let args = [
        "vital-eval", "--data", "g.txt", "--beta", "rel:0.5..2.0:7", "--beta-grid", "0.02:0.6:12", "--ensemble", "200",
        "--runs", "10", "--replicates", "2", "--measures", "hra,hdc", "--out", "tau.csv",
    ];
    let out = hypermine(dir.path(), &args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("tau.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 7 * 2);
    let rel: Vec<&str> = csv.lines().skip(1).step_by(2).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(rel, ["0.5", "0.75", "1", "1.25", "1.5", "1.75", "2"]);

    // The second run reuses the cached threshold and reproduces the file.
    let cache = std::fs::read_dir(dir.path().join(".hypermine-cache")).unwrap().count();
    assert_eq!(cache, 1);
    let first = csv;
    let out = hypermine(dir.path(), &args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(dir.path().join("tau.csv")).unwrap(), first);
}

#[test]
fn sir_reports_threshold() {
    let dir = tempfile::tempdir().unwrap();
    clustered(dir.path());
    let out = hypermine(
        dir.path(),
        &["sir", "--data", "g.txt", "--beta-grid", "0.02:0.6:12", "--runs", "200", "--seed", "7", "--out", "chi.csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let run = EvaluationRun::read(&dir.path().join("chi.json")).unwrap();
    assert!(run.summary["beta_c"].as_f64().unwrap() > 0.0);
    let grid_rows = run.headline.rows.iter().filter(|r| r[1] == "grid").count();
    assert_eq!(grid_rows, 12);

    let out = hypermine(dir.path(), &["sir", "--data", "g.txt", "--beta-grid", "0.02:0.6:5", "--out", "x.csv"]);
    assert_eq!(code(&out), 2, "grid too small must be a config error");
}

#[test]
fn ablation_pairs_sources() {
    let dir = tempfile::tempdir().unwrap();
    clustered(dir.path());
    let out = hypermine(
        dir.path(),
        &["ablation", "--data", "g.txt", "--labels", "g.labels", "--folds", "3", "--seeds", "0..1", "--out", "ab.csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("ab.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "pipeline,metric,beta,source_p,source_m,delta");
    assert_eq!(lines.len(), 4);
    for l in &lines[1..] {
        let f: Vec<f64> = l.split(',').skip(3).map(|x| x.parse().unwrap()).collect();
        assert!((f[0] - f[1] - f[2]).abs() < 1e-12, "{l}");
    }
}

#[test]
fn saved_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let out = hypermine(
        dir.path(),
        &["linkpred", "--data", "toy.txt", "--folds", "2", "--seeds", "1,2", "--out", "a.json", "--save-config", "cfg.json"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("cfg.json")).unwrap();
    let cfg = ExperimentConfig::from_json(&text).unwrap();
    assert_eq!(cfg.to_json(), text);

    let mut other = cfg.clone();
    other.output = "b.json".into();
    std::fs::write(dir.path().join("cfg_b.json"), other.to_json()).unwrap();
    let out = hypermine(dir.path(), &["run", "--config", "cfg_b.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let ra = EvaluationRun::read(&dir.path().join("a.json")).unwrap();
    let rb = EvaluationRun::read(&dir.path().join("b.json")).unwrap();
    assert_eq!(ra.units, rb.units);
}

#[test]
fn verify_detects_changed_dataset() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let out = hypermine(dir.path(), &["vital", "--data", "toy.txt", "--out", "v.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(code(&hypermine(dir.path(), &["verify", "v.json"])), 0);
    std::fs::write(dir.path().join("toy.txt"), "a b\nb c\nc a\n").unwrap();
    let out = hypermine(dir.path(), &["verify", "v.json"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("differs from recorded"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    std::fs::write(dir.path().join("dup.txt"), "a b a\n").unwrap();
    std::fs::write(dir.path().join("empty.txt"), "").unwrap();
    let cases: [(&[&str], i32); 6] = [
        (&["linkpred", "--data", "toy.txt", "--rho", "1.5", "--out", "x.json"], 2),
        (&["linkpred", "--data", "toy.txt", "--algo", "pagerank", "--out", "x.json"], 2),
        (&["vital", "--data", "toy.txt", "--katz-gamma", "0.9", "--measures", "katz", "--out", "x.json"], 2),
        (&["linkpred", "--data", "missing.txt", "--out", "x.json"], 3),
        (&["vital", "--data", "dup.txt", "--out", "x.json"], 3),
        (&["vital", "--data", "empty.txt", "--out", "x.json"], 3),
    ];
    for (args, want) in cases {
        let out = hypermine(dir.path(), args);
        assert_eq!(code(&out), want, "{args:?}: {}", stderr(&out));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_hypermine"))
        .args(["vital", "--data", "toy.txt", "--out", "x.json"])
        .current_dir(dir.path())
        .env("HYPERMINE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn convert_triples_and_identity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("nverts.txt"), "2\n3\n1\n2\n").unwrap();
    std::fs::write(d.join("simplices.txt"), "1\n2\n2\n3\n4\n5\n1\n2\n").unwrap();
    std::fs::write(d.join("times.txt"), "1\n2\n3\n4\n").unwrap();
    let out = hypermine(
        d,
        &["convert", "--nverts", "nverts.txt", "--simplices", "simplices.txt", "--times", "times.txt", "--out", "c.txt"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(d.join("c.txt")).unwrap(), "1 2\n2 3 4\n1 2\n");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("N=4 M=3 "), "{stdout}");

    let out = hypermine(d, &["convert", "--input", "c.txt", "--out", "c2.txt"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(std::fs::read(d.join("c.txt")).unwrap(), std::fs::read(d.join("c2.txt")).unwrap());

    let out = hypermine(d, &["convert", "--input", "c.txt", "--dedupe", "--out", "c3.txt"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("N=4 M=2 "));
}
