//! Runs the `qmarg` binary on the shipped fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn fixture(case: &str, name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(case)
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn qmarg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmarg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn real_entries(v: &Value) -> Vec<f64> {
    v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| z[0].as_f64().unwrap())
        .collect()
}

fn write_diagonal(dir: &Path, name: &str, diag: &[f64]) -> String {
    let n = diag.len();
    let entries: Vec<[f64; 2]> = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                [diag[k / n], 0.0]
            } else {
                [0.0, 0.0]
            }
        })
        .collect();
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, json!({"dims": [n], "entries": entries}).to_string()).unwrap();
    path.display().to_string()
}

/// The 3x4 low-rank marginals as diagonal matrix files.
fn low_rank_marginals(dir: &Path) -> (String, String) {
    let values = |name: &str| -> Vec<f64> {
        read_json(Path::new(&fixture("low_rank_3x4", name)))["values"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect()
    };
    (
        write_diagonal(dir, "rho1", &values("spectrum1")),
        write_diagonal(dir, "rho2", &values("spectrum2")),
    )
}

fn near(v: &Value, target: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - target).abs() <= tol
}

#[test]
fn trace_recovers_printed_marginal() {
    let out = qmarg(&[
        "trace",
        &fixture("tripartite_feasible", "printed_solution"),
        "--keep",
        "2,3",
    ]);
    assert_eq!(code(&out), 0);
    let got = real_entries(&stdout_json(&out));
    let want = real_entries(&read_json(Path::new(&fixture(
        "tripartite_feasible",
        "rho_last_two",
    ))));
    assert_eq!(stdout_json(&out)["dims"], json!([2, 2]));
    assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-3));
}

#[test]
fn trace_of_product_is_factor() {
    let dir = TempDir::new().unwrap();
    // diag(0.25, 0.75) ⊗ diag(0.5, 0.5)
    let product = write_diagonal(dir.path(), "p", &[0.125, 0.125, 0.375, 0.375]);
    let mut v = read_json(Path::new(&product));
    v["dims"] = json!([2, 2]);
    std::fs::write(&product, v.to_string()).unwrap();
    let out = qmarg(&["trace", &product, "--keep", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(real_entries(&stdout_json(&out)), vec![0.25, 0.0, 0.0, 0.75]);
}

#[test]
fn malformed_file_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"dims\": [2], \"entries\": [[1, 0]]}").unwrap();
    let out = qmarg(&["trace", path.to_str().unwrap(), "--keep", "1"]);
    assert_eq!(code(&out), 1);
    std::fs::write(&path, "not json").unwrap();
    assert_eq!(
        code(&qmarg(&["trace", path.to_str().unwrap(), "--keep", "1"])),
        1
    );
}

#[test]
fn solve_spectrum_on_bipartite_fixture() {
    let dir = TempDir::new().unwrap();
    let case = "prescribed_spectrum_2x3";
    let out = qmarg(&[
        "solve",
        "spectrum",
        "--marginal",
        &format!("1:{}", fixture(case, "rho1")),
        "--marginal",
        &format!("2:{}", fixture(case, "rho2")),
        "--spectrum",
        &fixture(case, "spectrum"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let summary = stdout_json(&out);
    assert_eq!(summary["converged"], json!(true));
    assert!(summary["marginal_residual"].as_f64().unwrap() <= 1e-10);
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(
        report["residual_history"].as_array().unwrap().len() as u64,
        summary["iterations"].as_u64().unwrap()
    );
    let verify = qmarg(&[
        "verify",
        dir.path().join("solution.json").to_str().unwrap(),
        "--marginal",
        &format!("1:{}", fixture(case, "rho1")),
        "--marginal",
        &format!("2:{}", fixture(case, "rho2")),
        "--spectrum",
        &fixture(case, "spectrum"),
    ]);
    assert_eq!(code(&verify), 0);
}

#[test]
fn rank_two_from_greedy_start() {
    let dir = TempDir::new().unwrap();
    let (r1, r2) = low_rank_marginals(dir.path());
    let out = qmarg(&[
        "solve",
        "rank",
        "--marginal",
        &format!("1:{r1}"),
        "--marginal",
        &format!("2:{r2}"),
        "--cap",
        "2",
        "--init",
        "greedy",
        "--tol",
        "1e-10",
        "--max-iter",
        "20000",
    ]);
    assert_eq!(code(&out), 0);
    let s = stdout_json(&out);
    assert_eq!(s["rank"], json!(2));
    assert!(near(&s["entropy"], 0.1893, 1e-3));
}

#[test]
fn trace_mismatch_is_rejected() {
    let dir = TempDir::new().unwrap();
    let a = write_diagonal(dir.path(), "a", &[0.5, 0.5]);
    let b = write_diagonal(dir.path(), "b", &[0.5, 0.4]);
    let out = qmarg(&[
        "solve",
        "feasible",
        "--marginal",
        &format!("1:{a}"),
        "--marginal",
        &format!("2:{b}"),
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["consistent"], json!(false));
}

#[test]
fn greedy_construction_reports_rank_and_entropy() {
    let dir = TempDir::new().unwrap();
    let (r1, r2) = low_rank_marginals(dir.path());
    let out = qmarg(&[
        "construct",
        "greedy",
        "--marginal",
        &format!("1:{r1}"),
        "--marginal",
        &format!("2:{r2}"),
    ]);
    assert_eq!(code(&out), 0);
    let s = stdout_json(&out);
    assert_eq!(s["rank"], json!(3));
    assert!(near(&s["lambda_max"], 0.9531, 1e-4));
    assert!(near(&s["entropy"], 0.2158, 1e-4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical rank 3"));
}

#[test]
fn pure_construction_on_isospectral_inputs() {
    let dir = TempDir::new().unwrap();
    let a = write_diagonal(dir.path(), "a", &[0.7, 0.3]);
    let b = write_diagonal(dir.path(), "b", &[0.3, 0.0, 0.7]);
    let out = qmarg(&[
        "construct",
        "pure",
        "--marginal",
        &format!("1:{a}"),
        "--marginal",
        &format!("2:{b}"),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["rank"], json!(1));
}

#[test]
fn rank_out_of_range_reports_interval() {
    let dir = TempDir::new().unwrap();
    let a = write_diagonal(dir.path(), "a", &[0.5, 0.3, 0.2]);
    let b = write_diagonal(dir.path(), "b", &[0.4, 0.3, 0.2, 0.1]);
    let out = qmarg(&[
        "construct",
        "rank-k",
        "--k",
        "13",
        "--marginal",
        &format!("1:{a}"),
        "--marginal",
        &format!("2:{b}"),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("[4, 6]"));
    let sweep = qmarg(&[
        "construct",
        "sweep",
        "--k",
        "12",
        "--marginal",
        &format!("1:{a}"),
        "--marginal",
        &format!("2:{b}"),
    ]);
    assert_eq!(code(&sweep), 0);
    assert_eq!(stdout_json(&sweep)["rank"], json!(12));
}

#[test]
fn tripartite_feasible_with_inferred_dims() {
    let dir = TempDir::new().unwrap();
    let case = "tripartite_feasible";
    let last = format!("2,3:{}", fixture(case, "rho_last_two"));
    let first = format!("1,2:{}", fixture(case, "rho_first_two"));
    let consistent = qmarg(&["consistency", "--marginal", &last, "--marginal", &first]);
    assert_eq!(code(&consistent), 0);
    let out = qmarg(&[
        "solve",
        "feasible",
        "--marginal",
        &last,
        "--marginal",
        &first,
        "--tol",
        "1e-10",
        "--max-iter",
        "5000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let solution = dir.path().join("solution.json");
    assert_eq!(read_json(&solution)["dims"], json!([2, 2, 2]));
    let verify = qmarg(&[
        "verify",
        solution.to_str().unwrap(),
        "--marginal",
        &last,
        "--marginal",
        &first,
    ]);
    assert_eq!(code(&verify), 0);
}

#[test]
fn same_seed_same_output() {
    let run = || {
        let dir = TempDir::new().unwrap();
        let case = "symmetric_extension";
        let pair = fixture(case, "rho_pair");
        let out = qmarg(&[
            "solve",
            "feasible",
            "--marginal",
            &format!("1,2:{pair}"),
            "--marginal",
            &format!("1,3:{pair}"),
            "--seed",
            "5",
            "--restarts",
            "3",
            "--max-iter",
            "5000",
            "--tol",
            "1e-10",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        std::fs::read(dir.path().join("solution.json")).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn iteration_limit_gives_exit_two() {
    let case = "prescribed_spectrum_2x3";
    let out = qmarg(&[
        "solve",
        "spectrum",
        "--marginal",
        &format!("1:{}", fixture(case, "rho1")),
        "--marginal",
        &format!("2:{}", fixture(case, "rho2")),
        "--spectrum",
        &fixture(case, "spectrum"),
        "--max-iter",
        "2",
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout_json(&out)["converged"], json!(false));
}

#[test]
fn min_entropy_reaches_stationarity() {
    let dir = TempDir::new().unwrap();
    let (r1, r2) = low_rank_marginals(dir.path());
    let out = qmarg(&[
        "solve",
        "min-entropy",
        "--marginal",
        &format!("1:{r1}"),
        "--marginal",
        &format!("2:{r2}"),
        "--init",
        "greedy",
        "--max-iter",
        "10000",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s = stdout_json(&out);
    assert!(s["marginal_residual"].as_f64().unwrap() < 1e-9);
    let renyi = qmarg(&[
        "solve",
        "min-entropy",
        "--marginal",
        &format!("1:{r1}"),
        "--marginal",
        &format!("2:{r2}"),
        "--alpha",
        "2",
    ]);
    assert_eq!(
        code(&renyi),
        0,
        "{}",
        String::from_utf8_lossy(&renyi.stderr)
    );
}

#[test]
fn projection_modes() {
    let dir = TempDir::new().unwrap();
    let case = "prescribed_spectrum_2x3";
    let z = dir.path().join("z.json");
    let rnd = qmarg(&[
        "random",
        "density",
        "--dims",
        "2,3",
        "--seed",
        "4",
        "--out",
        z.to_str().unwrap(),
    ]);
    assert_eq!(code(&rnd), 0);
    let marg = [
        "--marginal".to_string(),
        format!("1:{}", fixture(case, "rho1")),
        "--marginal".to_string(),
        format!("2:{}", fixture(case, "rho2")),
    ];
    let mut args: Vec<&str> = vec!["project", z.to_str().unwrap()];
    args.extend(marg.iter().map(String::as_str));
    let affine = qmarg(&[args.as_slice(), &["--affine"]].concat());
    assert_eq!(code(&affine), 0);
    assert!(stdout_json(&affine)["marginal_residual"].as_f64().unwrap() < 1e-12);
    for mode in ["dykstra", "plain"] {
        let out = qmarg(
            &[
                args.as_slice(),
                &["--mode", mode, "--max-iter", "50000", "--tol", "1e-10"],
            ]
            .concat(),
        );
        assert_eq!(code(&out), 0, "mode {mode}");
        assert!(stdout_json(&out)["lambda_min"].as_f64().unwrap() > -1e-8);
    }
}

#[test]
fn random_outputs() {
    let p = qmarg(&["random", "probvec", "--n", "5", "--seed", "2"]);
    assert_eq!(code(&p), 0);
    let sum: f64 = stdout_json(&p)["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .sum();
    assert!((sum - 1.0).abs() < 1e-12);
    let u = qmarg(&["random", "unitary", "--n", "3", "--seed", "2"]);
    assert_eq!(code(&u), 0);
    assert_eq!(stdout_json(&u)["entries"].as_array().unwrap().len(), 9);
    assert_eq!(
        qmarg(&["random", "unitary", "--n", "3", "--seed", "2"]).stdout,
        u.stdout
    );
    assert_eq!(code(&qmarg(&["random", "unitary", "--n", "0"])), 1);
}

#[test]
fn verify_rejects_non_state() {
    let dir = TempDir::new().unwrap();
    let bad = write_diagonal(dir.path(), "bad", &[1.2, -0.2]);
    let out = qmarg(&["verify", &bad]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["valid"], json!(false));
}
