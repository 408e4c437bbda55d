use std::path::Path;
use std::process::{Command, Output};

fn dualdescent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualdescent"))
        .args(args)
        .env_remove("DUALDESCENT_LOG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("g1");
    let out = dualdescent(&[
        "run", "--problem", "G1", "--solver", "sdd_admm", "--eps", "1e-2", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "k,potential,lip,h_norm,mu_norm,max_block_disp,resid_max,feas");
    assert!(lines.count() > 10);

    let summary = read_json(&out_dir.join("summary.json"));
    assert_eq!(summary["status"], "converged");
    assert_eq!(summary["exit_code"], 0);
    assert_eq!(summary["monitor_violations"], 0);
    assert!(summary["resid_max"].as_f64().unwrap() <= 1e-2);

    let cert = read_json(&out_dir.join("certificate.json"));
    assert_eq!(cert["kind"], "stationarity");
    assert!(cert["certificate"]["residual"].as_f64().unwrap() <= 1e-2);
}

#[test]
fn nonlinear_run_reports_kkt_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dualdescent(&[
        "run", "--problem", "G3", "--solver", "udd_nonlinear", "--varrho", "1e-6", "--eps", "1e-1",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cert = read_json(&dir.path().join("certificate.json"));
    assert_eq!(cert["kind"], "kkt");
    assert_eq!(cert["licq"]["full_column_rank"], true);
    let header = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(header.starts_with("k,potential,lip,h_norm,mu_norm,max_block_disp,resid_max,feas,L_aug,inner_iters"));
}

#[test]
fn config_errors_exit_one() {
    let bad_omega = dualdescent(&["run", "--problem", "G1", "--solver", "sdd_admm", "--omega", "2"]);
    assert_eq!(code(&bad_omega), 1);
    let unknown_solver = dualdescent(&["run", "--problem", "G1", "--solver", "newton"]);
    assert_eq!(code(&unknown_solver), 1);
    let unknown_flag = dualdescent(&["run", "--problem", "G1", "--solver", "sdd_admm", "--step", "3"]);
    assert_eq!(code(&unknown_flag), 1);
    let missing_file = dualdescent(&["run", "--problem", "/nonexistent/problem.json", "--solver", "sdd_admm"]);
    assert_eq!(code(&missing_file), 1);
    let bad_scope = dualdescent(&["verify", "--scope", "everything"]);
    assert_eq!(code(&bad_scope), 1);
}

#[test]
fn log_level_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_dualdescent"))
        .args(["gallery", "list"])
        .env("DUALDESCENT_LOG", "trace")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    let out = Command::new(env!("CARGO_BIN_EXE_dualdescent"))
        .args(["gallery", "list"])
        .env("DUALDESCENT_LOG", "info")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn max_iters_exits_two() {
    let out = dualdescent(&["run", "--problem", "G1", "--solver", "sdd_admm", "--max-iters", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn guard_trip_exits_three() {
    // default varrho = rho / 8 is unstable on G2
    let out = dualdescent(&["run", "--problem", "G2", "--solver", "udd_affine", "--eps", "1e-4"]);
    assert_eq!(code(&out), 3);
    let stable = dualdescent(&["run", "--problem", "G2", "--solver", "udd_affine", "--eps", "1e-4", "--varrho", "1e-6"]);
    assert_eq!(code(&stable), 0);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"problem": {"kind": "gallery", "id": "G2", "seed": 0}, "solver": "udd_affine",
            "params": {"eps": 1e-2, "varrho": 1e-6}}"#,
    )
    .unwrap();
    let out = dualdescent(&["run", "--config", cfg.to_str().unwrap(), "--eps", "1e-3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["eps"], 1e-3);
    assert_eq!(summary["solver"], "udd_affine");
}

#[test]
fn problem_file_round_trip_through_cli() {
    let g4 = dualdescent::gallery::make(dualdescent::gallery::GalleryId::G4, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g4.json");
    std::fs::write(&path, dualdescent::problem::json::to_string_pretty(&g4.problem).unwrap()).unwrap();
    let out = dualdescent(&[
        "run", "--problem", path.to_str().unwrap(), "--solver", "sdd_admm", "--eps", "1e-1", "--rho-mode", "eps1_rule",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gallery_list_has_four_entries() {
    let out = dualdescent(&["gallery", "list"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ids: Vec<_> = v.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap().to_string()).collect();
    assert_eq!(ids, ["G1", "G2", "G3", "G4"]);
}

#[test]
fn equivalence_command_passes() {
    let out = dualdescent(&["equivalence", "--problem", "G1"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert!(v.as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn sweep_writes_rate_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dualdescent(&[
        "sweep", "--problem", "G2", "--solver", "udd_affine", "--varrho", "1e-6", "--eps", "1e-1,1e-2,1e-3,1e-4",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(dir.path().join("rate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let report = read_json(&dir.path().join("rate_report.json"));
    assert!(report["slope"].as_f64().unwrap() > 0.0);

    let short = dualdescent(&["sweep", "--problem", "G2", "--solver", "udd_affine", "--eps", "1e-1,1e-2"]);
    assert_eq!(code(&short), 1);
}

#[test]
fn verify_fast_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let out = dualdescent(&["verify", "--scope", "fast", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(read_json(&path)["passed"], true);
}
