use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use vqsvm_cli::exit;
use vqsvm_cli::formats::{self, ModelFile, SolutionFile};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqsvm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> u8 {
    o.status.code().expect("exited normally") as u8
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn trace_costs(path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,cost"));
    lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

#[test]
fn decompose_sigma_x() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "sx.txt", "N 1\n0 1\n1 0\n");
    let o = run(dir.path(), &["decompose", "--matrix", "sx.txt", "--out", "e.txt"]);
    assert_eq!(code(&o), exit::SUCCESS, "{}", stderr(&o));
    assert_eq!(fs::read_to_string(dir.path().join("e.txt")).unwrap(), "N 1\nX 1 0\n");
}

#[test]
fn decompose_verifies_hermitian_two_qubit_matrix() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "h.txt",
        "N 2\n\
         0.5 0.1+0.2j -0.3j 1\n\
         0.1-0.2j -1 0.25 0.5-0.5j\n\
         0.3j 0.25 2 -0.7+0.1j\n\
         1 0.5+0.5j -0.7-0.1j 0\n",
    );
    let o = run(dir.path(), &["decompose", "--matrix", "h.txt", "--out", "e.txt", "--verify-circuit"]);
    assert_eq!(code(&o), exit::SUCCESS, "{}", stderr(&o));
    let out = stdout(&o);
    let disc: f64 = out
        .split("max discrepancy ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(disc < 1e-10, "{out}");
    let e = formats::parse_expansion(&fs::read_to_string(dir.path().join("e.txt")).unwrap(), "e").unwrap();
    assert!(e.terms().iter().all(|(_, c)| c.im.abs() < 1e-12));
}

#[test]
fn malformed_matrix_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bad.txt", "N 1\n0 1\n1\n");
    let o = run(dir.path(), &["decompose", "--matrix", "bad.txt", "--out", "e.txt"]);
    assert_eq!(code(&o), exit::PARSE_ERROR);
    assert!(stderr(&o).contains("bad.txt:3"), "{}", stderr(&o));
    assert!(!dir.path().join("e.txt").exists());
}

#[test]
fn prepare_zero_state_from_identity_angles() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["prepare-state", "--target", "basis:0", "--n-qubits", "2", "--init", "identity", "--trace", "t.csv", "--out", "p.txt"],
    );
    assert_eq!(code(&o), exit::SUCCESS, "{}", stderr(&o));
    assert_eq!(trace_costs(&dir.path().join("t.csv")), vec![0.0]);
    let p = formats::parse_params(&fs::read_to_string(dir.path().join("p.txt")).unwrap(), "p").unwrap();
    assert_eq!(p.theta().len(), 15);
}

#[test]
fn prepare_random_target_with_default_schedule() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "target.txt", "N 2\n0.5\n0.5j\n-0.5\n0.1+0.4j\n");
    let o = run(dir.path(), &["prepare-state", "--target", "target.txt", "--seed", "4", "--trace", "t.csv"]);
    assert_eq!(code(&o), exit::SUCCESS, "{}", stderr(&o));
    let costs = trace_costs(&dir.path().join("t.csv"));
    assert!(*costs.last().unwrap() < 1e-3);
}

#[test]
fn slow_schedule_reports_non_convergence_and_keeps_the_trace() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &[
            "prepare-state", "--target", "random:1", "--n-qubits", "2", "--xi1", "0.005", "--xi2", "0.005",
            "--cost-tolerance", "1e-3", "--trace", "t.csv", "--out", "p.txt",
        ],
    );
    assert_eq!(code(&o), exit::NOT_CONVERGED, "{}", stderr(&o));
    let costs = trace_costs(&dir.path().join("t.csv"));
    assert!(costs.iter().all(|c| (0.0..=1.0).contains(c)));
    // Slow schedule: the cost falls but stays above tolerance.
    assert!(costs.iter().all(|c| *c <= costs[0] + 1e-12));
    assert!(costs.last().unwrap() < &costs[0]);
    assert!(dir.path().join("p.txt").exists());
}

#[test]
fn four_qubit_targets_are_unsupported() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["prepare-state", "--target", "random:1", "--n-qubits", "4"]);
    assert_ne!(code(&o), exit::SUCCESS);
    assert!(stderr(&o).contains("4 qubits"), "{}", stderr(&o));
}

#[test]
fn svm_two_point_exact_model() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "two.csv", "x1,x2,label\n1,0,1\n-1,0,-1\n");
    let o = run(dir.path(), &["svm", "--dataset", "two.csv", "--method", "exact", "--out", "out"]);
    assert_eq!(code(&o), exit::SUCCESS, "{}", stderr(&o));
    let m: ModelFile = serde_json::from_str(&fs::read_to_string(dir.path().join("out/exact_model.json")).unwrap()).unwrap();
    assert!(m.omega0.abs() < 1e-12);
    assert!((m.alpha[0] - 1.0 / 3.0).abs() < 1e-12 && (m.alpha[1] + 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(m.n_points, 2);
    let line = fs::read_to_string(dir.path().join("out/exact_line.csv")).unwrap();
    assert_eq!(line, "x,y\n0,-1\n0,1\n");
}

#[test]
fn svm_variational_without_steps() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "two.csv", "x1,x2,label\n1,0,1\n-1,0,-1\n");
    let o = run(
        dir.path(),
        &["svm", "--dataset", "two.csv", "--method", "variational", "--max-steps", "0", "--out", "out"],
    );
    assert_eq!(code(&o), exit::NOT_CONVERGED);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["variational_converged"], false);
    assert_eq!(summary["variational_steps"], 0);
    assert!(dir.path().join("out/variational_model.json").exists());
    assert_eq!(trace_costs(&dir.path().join("out/variational_trace.csv")).len(), 1);
}

#[test]
fn svm_both_methods_from_generator() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "gen.json",
        r#"{"r": 3, "n_red": 4, "n_blue": 3, "theta_seed": 5, "point_seed": 6}"#,
    );
    let o = run(
        dir.path(),
        &["svm", "--generator", "gen.json", "--xi1", "0.5", "--xi2", "0.0005", "--out", "out"],
    );
    assert_eq!(code(&o), exit::SUCCESS, "{}\n{}", stdout(&o), stderr(&o));
    for f in ["dataset.csv", "exact_model.json", "exact_line.csv", "variational_model.json", "variational_line.csv", "variational_trace.csv"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert!(summary["normal_angle_degrees"].as_f64().unwrap() < 5.0, "{summary}");
    assert_eq!(summary["exact_accuracy"], summary["variational_accuracy"]);
}

#[test]
fn bad_dataset_label_names_the_line() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "d.csv", "x1,x2,label\n1,0,1\n-1,0,0\n");
    let o = run(dir.path(), &["svm", "--dataset", "d.csv", "--out", "out"]);
    assert_eq!(code(&o), exit::PARSE_ERROR);
    assert!(stderr(&o).contains("d.csv:3"), "{}", stderr(&o));
}

#[test]
fn qfpga_examples() {
    let dir = TempDir::new().unwrap();
    let fidelity = |args: &[&str]| -> f64 {
        let mut full = vec!["qfpga", "--out", "u.txt", "--report", "r.json"];
        full.extend_from_slice(args);
        let o = run(dir.path(), &full);
        assert_eq!(code(&o), exit::SUCCESS, "{}", stderr(&o));
        let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
        let u = formats::parse_matrix(&fs::read_to_string(dir.path().join("u.txt")).unwrap(), "u").unwrap();
        assert!(u.unitarity_defect() < 1e-12);
        r["fidelity"].as_f64().unwrap()
    };
    assert!(fidelity(&["--initial", "random:2", "--final", "random:2", "--n-qubits", "2"]) >= 1.0 - 1e-6);
    assert!(fidelity(&["--initial", "basis:0", "--final", "basis:1", "--n-qubits", "1"]) > 0.999);
    assert!(fidelity(&["--initial", "random:3", "--final", "random:4", "--n-qubits", "2", "--seed", "8"]) > 0.995);
}

#[test]
fn qfpga_non_convergence_reports_both_costs() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["qfpga", "--initial", "random:1", "--final", "random:2", "--n-qubits", "2", "--max-steps", "1", "--out", "u.txt"],
    );
    assert_eq!(code(&o), exit::NOT_CONVERGED);
    assert!(stderr(&o).contains("initial cost") && stderr(&o).contains("final cost"));
}

#[test]
fn solve_linear_modes() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "f.txt", "N 1\n0 1\n1 2\n");
    write(dir.path(), "y.txt", "N 1\n0\n1\n");
    let o = run(dir.path(), &["solve-linear", "--matrix", "f.txt", "--rhs", "y.txt", "--mode", "exact", "--out", "s.json"]);
    assert_eq!(code(&o), exit::SUCCESS, "{}", stderr(&o));
    let s: SolutionFile = serde_json::from_str(&fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(s.x, vec![[1.0, 0.0], [0.0, 0.0]]);

    let o = run(
        dir.path(),
        &["solve-linear", "--matrix", "f.txt", "--rhs", "y.txt", "--real-only", "--out", "s.json", "--trace", "t.csv"],
    );
    assert_eq!(code(&o), exit::SUCCESS, "{}", stderr(&o));
    let s: SolutionFile = serde_json::from_str(&fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert!(s.residual < 1e-3);
    assert!(s.converged);
    assert_eq!(trace_costs(&dir.path().join("t.csv")).len(), s.steps + 1);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let args = |out: &'static str| {
        vec!["svm", "--generator", "gen.json", "--xi1", "0.5", "--max-steps", "300", "--seed", "3", "--out", out]
    };
    write(dir.path(), "gen.json", r#"{"r": 2, "n_red": 3, "n_blue": 4, "theta_seed": 1, "point_seed": 2}"#);
    run(dir.path(), &args("a"));
    run(dir.path(), &args("b"));
    let mut names: Vec<_> = fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 6);
    for n in names {
        assert_eq!(
            fs::read(dir.path().join("a").join(&n)).unwrap(),
            fs::read(dir.path().join("b").join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn config_file_with_override() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "run.json",
        r#"{"command": "generate-data", "r": 2, "n_red": 5, "n_blue": 6, "theta_seed": 1, "point_seed": 2, "out": "d.csv"}"#,
    );
    let o = run(dir.path(), &["--config", "run.json", "--n-blue", "2"]);
    assert_eq!(code(&o), exit::SUCCESS, "{}", stderr(&o));
    let d = formats::parse_dataset(&fs::read_to_string(dir.path().join("d.csv")).unwrap(), "d").unwrap();
    assert_eq!(d.len(), 7);

    let o = run(dir.path(), &["generate-data", "--config", "run.json", "--out", "e.csv"]);
    assert_eq!(code(&o), exit::SUCCESS, "{}", stderr(&o));
    let e = formats::parse_dataset(&fs::read_to_string(dir.path().join("e.csv")).unwrap(), "e").unwrap();
    assert_eq!(e.len(), 11);
}

#[test]
fn malformed_config_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "run.json", "[1, 2]");
    let o = run(dir.path(), &["svm", "--config", "run.json"]);
    assert_eq!(code(&o), exit::PARSE_ERROR);
}

#[test]
fn unknown_flag_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["generate-data", "--out", "d.csv", "--bogus", "1"]);
    assert_eq!(code(&o), exit::PARSE_ERROR);
}
