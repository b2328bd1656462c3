use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_magframe"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn cycle_graph(dir: &TempDir) -> String {
    write(dir, "g.tsv", "#nodes=5\n0\t1\n1\t2\n2\t3\n3\t4\n4\t0\n0\t2\n")
}

fn parse_signal(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

#[test]
fn edgeless_zero_signal_gives_zero_rows() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.tsv", "#nodes=2\n");
    let x = write(&dir, "x.csv", "0\n0\n");
    let o = run(&["transform", "--graph", &g, "--signal", &x, "--bank", "haar", "--q", "0.1", "--levels", "2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("block_index,r,s,node,real,imag"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 2);
    for row in rows {
        let fields: Vec<f64> = row.split(',').skip(4).map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields, vec![0.0, 0.0]);
    }
}

#[test]
fn transform_reconstruct_round_trip() {
    let dir = TempDir::new().unwrap();
    let g = cycle_graph(&dir);
    let signal = [0.3, -1.2, 2.5, 0.0, 4.25];
    let x = write(&dir, "x.csv", &signal.map(|v| v.to_string()).join("\n"));
    for (bank, mode) in [("haar", "exact"), ("entropy", "exact"), ("sigmoid", "chebyshev")] {
        let c = dir.path().join(format!("{bank}.csv"));
        let c = c.to_str().unwrap();
        let common = ["--graph", &g, "--bank", bank, "--mode", mode, "--cheb-degree", "64", "--q", "0.2"];
        let o = bin().arg("transform").args(common).args(["--signal", &x, "--out", c]).output().unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
        let o = bin().arg("reconstruct").args(common).args(["--coeffs", c]).output().unwrap();
        assert_eq!(code(&o), 0);
        let back = parse_signal(&stdout(&o));
        let tol = if mode == "exact" { 1e-8 } else { 1e-5 };
        for (&v, &(re, im)) in signal.iter().zip(&back) {
            assert!((re - v).abs() < tol && im.abs() < tol, "{bank}: {re} {im} vs {v}");
        }
    }
}

#[test]
fn bad_flags_exit_two() {
    let dir = TempDir::new().unwrap();
    let g = cycle_graph(&dir);
    let x = write(&dir, "x.csv", "1\n2\n3\n4\n5\n");
    let base = ["transform", "--graph", &g, "--signal", &x];
    let o = bin().args(base).args(["--bank", "daubechies"]).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("daubechies"));
    assert_eq!(code(&bin().args(base).args(["--q", "0.3"]).output().unwrap()), 2);
    assert_eq!(code(&bin().args(base).args(["--levels", "0"]).output().unwrap()), 2);
    assert_eq!(code(&run(&[])), 2);
}

#[test]
fn data_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let g = cycle_graph(&dir);
    let short = write(&dir, "short.csv", "1\n2\n");
    let o = run(&["transform", "--graph", &g, "--signal", &short]);
    assert_eq!(code(&o), 3);
    let o = run(&["transform", "--graph", "/nonexistent/g.tsv", "--signal", &short]);
    assert_eq!(code(&o), 3);
    let loops = write(&dir, "loops.tsv", "#nodes=2\n0\t0\n");
    assert_eq!(code(&run(&["verify", "--graph", &loops])), 3);
}

#[test]
fn verify_passes_on_graphs_and_skips_mra_for_quasi_banks() {
    let dir = TempDir::new().unwrap();
    let g = cycle_graph(&dir);
    for bank in ["haar", "linear", "quadratic", "sigmoid", "entropy"] {
        let o = run(&["verify", "--graph", &g, "--bank", bank, "--levels", "3"]);
        assert_eq!(code(&o), 0, "{bank}: {}", stdout(&o));
        let text = stdout(&o);
        let names: Vec<&str> = text.lines().map(|l| l.split('\t').next().unwrap()).collect();
        assert_eq!(
            names,
            ["hermitian_residual", "min_eigenvalue", "identity_deviation", "tightness_residual", "mra_scaling"]
        );
        let mra = text.lines().last().unwrap();
        assert_eq!(mra.ends_with("skipped"), matches!(bank, "sigmoid" | "entropy"), "{mra}");
    }
}

#[test]
fn verify_reads_triplets() {
    let dir = TempDir::new().unwrap();
    // 2-node magnetic Laplacian of one edge at q = 0.25: off-diagonals -(±i)
    let good = write(&dir, "good.csv", "0,0,1,0\n1,1,1,0\n0,1,0,-1\n1,0,0,1\n");
    let o = run(&["verify", "--laplacian", &good, "--q", "0.25"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let broken = write(&dir, "broken.csv", "0,0,1,0\n1,1,1,0\n0,1,0,-1\n1,0,0,-1\n");
    let o = run(&["verify", "--laplacian", &broken]);
    assert_eq!(code(&o), 3);
    assert!(o.stdout.is_empty());
}

#[test]
fn verify_failure_exits_one() {
    let dir = TempDir::new().unwrap();
    // Hermitian with a negative eigenvalue
    let indefinite = write(&dir, "neg.csv", "0,0,-1,0\n1,1,1,0\n");
    let o = run(&["verify", "--laplacian", &indefinite]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("min_eigenvalue\t-1e0\tFAIL"));
}

#[test]
fn atoms_are_unit_columns_of_the_bank() {
    let dir = TempDir::new().unwrap();
    let g = cycle_graph(&dir);
    let o = run(&["atoms", "--graph", &g, "--bank", "haar", "--nodes", "1,3", "--level", "2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 2 * 2 * 5);
    // Haar bands satisfy z_0² + z_1² = 1, so the squared atom norms at a
    // centre sum to one.
    for centre in ["1", "3"] {
        let energy: f64 = rows
            .iter()
            .filter(|r| r[0] == centre)
            .map(|r| r[4].parse::<f64>().unwrap().powi(2) + r[5].parse::<f64>().unwrap().powi(2))
            .sum();
        assert!((energy - 1.0).abs() < 1e-12, "{energy}");
    }
    assert_eq!(code(&run(&["atoms", "--graph", &g, "--nodes", "9"])), 3);
}

fn small_config(dir: &TempDir, task: &str, epochs: usize) -> String {
    let data = root().join("data/synthetic");
    let cfg = serde_json::json!({
        "task": task, "dataset": data, "bank": "haar", "q": 0.25, "S": 2, "K": 32,
        "mode": "exact", "lr": 0.01, "weight_decay": 5e-4, "epochs": epochs, "patience": 50,
        "hidden_dims": [4], "n_repeats": 2, "seed": 5
    });
    write(dir, &format!("{task}.json"), &cfg.to_string())
}

fn strip_clock(report: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(report).unwrap();
    v.as_object_mut().unwrap().remove("wall_clock_seconds");
    v
}

#[test]
fn train_is_deterministic_and_writes_a_checkpoint() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(&dir, "node", 40);
    let ckpt = dir.path().join("best.json");
    let args = ["train", "--config", &cfg, "--n-repeats", "1", "--seed", "11"];
    let a = bin().args(args).args(["--checkpoint", ckpt.to_str().unwrap()]).output().unwrap();
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b = bin().args(args).output().unwrap();
    assert_eq!(strip_clock(&stdout(&a)), strip_clock(&stdout(&b)));
    let report = strip_clock(&stdout(&a));
    assert_eq!(report["repeats"].as_array().unwrap().len(), 1);
    assert_eq!(report["repeats"][0]["seed"], 11);
    let checkpoint = magframe::network::Checkpoint::load(&ckpt).unwrap();
    assert_eq!(checkpoint.version, magframe::network::CHECKPOINT_VERSION);
}

#[test]
fn train_link_task() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(&dir, "link_direction", 20);
    let o = run(&["train", "--config", &cfg, "--jobs", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = strip_clock(&stdout(&o));
    assert_eq!(report["repeats"].as_array().unwrap().len(), 2);
}

#[test]
fn missing_dataset_exits_three() {
    let dir = TempDir::new().unwrap();
    let cfg = serde_json::json!({
        "task": "node", "dataset": "nowhere", "bank": "haar", "q": 0.25, "S": 2, "K": 32,
        "mode": "exact", "lr": 0.01, "weight_decay": 5e-4, "epochs": 5, "patience": 5,
        "hidden_dims": [4], "n_repeats": 1, "seed": 0
    });
    let p = write(&dir, "c.json", &cfg.to_string());
    let o = run(&["train", "--config", &p]);
    assert_eq!(code(&o), 3);
    assert!(o.stdout.is_empty());
    let garbled = write(&dir, "bad.json", "{\"task\": ");
    assert_eq!(code(&run(&["train", "--config", &garbled])), 3);
}

#[test]
fn divergent_training_exits_four() {
    let dir = TempDir::new().unwrap();
    let data = root().join("data/synthetic");
    let cfg = serde_json::json!({
        "task": "node", "dataset": data, "bank": "haar", "q": 0.25, "S": 2, "K": 32,
        "mode": "exact", "lr": 1e308, "weight_decay": 0.0, "epochs": 20, "patience": 20,
        "optimizer": "adam", "hidden_dims": [4], "n_repeats": 1, "seed": 0
    });
    let p = write(&dir, "c.json", &cfg.to_string());
    let o = run(&["train", "--config", &p]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn denoise_rows_and_clean_run() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(&dir, "node", 40);
    let o = run(&["denoise", "--config", &cfg, "--sigmas", "0,0.5,1e3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,sigma,mean,std");
    assert_eq!(lines.len(), 1 + 2 * 3);
    let models: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(models, ["framelet", "gcn", "framelet", "gcn", "framelet", "gcn"]);

    let train = strip_clock(&stdout(&run(&["train", "--config", &cfg])));
    let clean: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(clean, train["mean"].as_f64().unwrap());
}
