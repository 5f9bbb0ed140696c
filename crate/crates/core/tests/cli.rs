//! End-to-end runs of the `spinflow` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use spinflow::formats::{plane_fit_residual, read_obj_vertices};

fn spinflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinflow")).current_dir(dir).args(args).output().expect("binary runs")
}

fn run_with(dir: &Path, command: &str, config: &str, out: &str) -> Output {
    let cfg = dir.join(format!("{out}.cfg"));
    fs::write(&cfg, config).unwrap();
    spinflow(dir, &[command, "--config", cfg.to_str().unwrap(), "--out", dir.join(out).to_str().unwrap()])
}

fn report(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_zero_problem_converges_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(dir.path(), "solve", "chart.nx = 32\nreaction.h = 0\n", "zero");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path().join("zero/solve_report.json"));
    assert_eq!(r["status"], "converged");
    assert!(r["energy"].as_f64().unwrap() < 1e-20);
    assert_eq!(r["guard"]["exceeded"], false);
    assert!(dir.path().join("zero/solution.spnf").exists());
}

#[test]
fn solve_manufactured_recovers_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(dir.path(), "solve", "chart.nx = 32\nproblem.kind = manufactured\nsolver.tol = 1e-9\n", "m");
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path().join("m/solve_report.json"));
    assert!(r["residual"].as_f64().unwrap() <= 1e-9);
    assert!(r["error_vs_truth"].as_f64().unwrap() <= 1e-9);
    assert!(r["picard"]["residual_history"].as_array().unwrap().len() > 1);
}

#[test]
fn invalid_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(dir.path(), "solve", "chart.nx = 4\n", "bad");
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("bad").exists());

    let out = run_with(dir.path(), "solve", "chart.colour = red\n", "bad");
    assert_eq!(out.status.code(), Some(2));
    let out = spinflow(dir.path(), &["solve", "--config", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn divergence_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(dir.path(), "solve", "chart.nx = 16\nproblem.kind = manufactured\nproblem.amplitude = 8\n", "d");
    assert_eq!(out.status.code(), Some(5));
    let r = report(dir.path().join("d/solve_report.json"));
    assert_eq!(r["status"], "diverged");
    assert_eq!(r["guard"]["exceeded"], true);
    assert!(!dir.path().join("d/solution.spnf").exists());
}

#[test]
fn reconstruct_plane_and_corrupt_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run_with(d, "generate", "generate.kind = plane\nchart.nx = 16\n", "gen").status.code(), Some(0));
    let out = run_with(d, "reconstruct", "input.field = gen/plane.spnf\n", "rec");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let obj = fs::read_to_string(d.join("rec/surface.obj")).unwrap();
    assert!(!obj.contains('\r'));
    assert!(plane_fit_residual(&read_obj_vertices(&obj).unwrap()) <= 1e-8);
    let r = report(d.join("rec/reconstruct_report.json"));
    assert!((r["mesh_area"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(r["mean_curvature"]["max_abs"].as_f64().unwrap() <= 1e-8);

    let mut bytes = fs::read(d.join("gen/plane.spnf")).unwrap();
    bytes[..5].copy_from_slice(b"NOPE!");
    fs::write(d.join("corrupt.spnf"), bytes).unwrap();
    assert_eq!(run_with(d, "reconstruct", "input.field = corrupt.spnf\n", "bad").status.code(), Some(4));
}

#[test]
fn reconstruct_enneper_reports_small_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_with(d, "generate", "generate.kind = enneper\nchart.domain = disk\nchart.nx = 65\n", "gen");
    assert_eq!(run_with(d, "reconstruct", "input.field = gen/enneper.spnf\n", "rec").status.code(), Some(0));
    let r = report(d.join("rec/reconstruct_report.json"));
    assert!(r["mean_curvature"]["max_abs_interior"].as_f64().unwrap() < 0.05);
    assert!(r["area_gap"].as_f64().unwrap() < 1e-3);
}

fn sequence_list(dir: &str, len: usize) -> String {
    (0..len).map(|m| format!("{dir}/seq_{m:02}.spnf")).collect::<Vec<_>>().join(",")
}

#[test]
fn blowup_single_planted_bubble() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_with(d, "generate", "generate.kind = planted_single\nchart.nx = 256\n", "gen");
    let cfg = format!("input.sequence = {}\ninput.background = gen/background.spnf\n", sequence_list("gen", 6));
    let out = run_with(d, "blowup", &cfg, "bu");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(d.join("bu/blowup_report.json"));
    assert_eq!(r["points"].as_array().unwrap().len(), 1);
    assert!(r["ledger"]["relative_defect"].as_f64().unwrap() <= 0.01);
    assert!(r["guard"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn blowup_flat_sequence_and_mixed_charts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_with(d, "generate", "generate.kind = flat_sequence\nchart.nx = 64\n", "flat");
    let out = run_with(d, "blowup", &format!("input.sequence = {}\n", sequence_list("flat", 6)), "bu");
    assert_eq!(out.status.code(), Some(0));
    let r = report(d.join("bu/blowup_report.json"));
    assert!(r["points"].as_array().unwrap().is_empty());
    assert!(r["ledger"]["relative_defect"].as_f64().unwrap() <= 1e-12);

    run_with(d, "generate", "generate.kind = flat_sequence\nchart.nx = 32\n", "small");
    let mixed = format!("input.sequence = {},small/seq_00.spnf\n", sequence_list("flat", 4));
    assert_eq!(run_with(d, "blowup", &mixed, "mixed").status.code(), Some(2));
    let short = format!("input.sequence = {}\n", sequence_list("flat", 3));
    assert_eq!(run_with(d, "blowup", &short, "short").status.code(), Some(2));
}

#[test]
fn verify_default_and_broken_stencil() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let good = run_with(d, "verify", "", "ok");
    assert_eq!(good.status.code(), Some(0));
    let again = run_with(d, "verify", "", "ok2");
    assert_eq!(good.stdout, again.stdout);
    assert_eq!(fs::read(d.join("ok/verify_report.json")).unwrap(), fs::read(d.join("ok2/verify_report.json")).unwrap());

    let broken = run_with(d, "verify", "verify.broken_stencil = true\n", "broken");
    assert_eq!(broken.status.code(), Some(1));
    let text = String::from_utf8(broken.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL weitzenboeck_fd_order")));
    let r = report(d.join("broken/verify_report.json"));
    assert_eq!(r["passed"], false);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = "chart.nx = 16\nreaction.h = 0.5\nproblem.seed_amplitude = 0.3\n";
    run_with(d, "solve", cfg, "a");
    run_with(d, "solve", cfg, "b");
    for f in ["solution.spnf", "solve_report.json"] {
        assert_eq!(fs::read(d.join("a").join(f)).unwrap(), fs::read(d.join("b").join(f)).unwrap());
    }
    let cfg_path = d.join("a.cfg");
    let other = spinflow(d, &["solve", "--config", cfg_path.to_str().unwrap(), "--out", "c", "--seed", "7"]);
    assert_eq!(other.status.code(), Some(0));
    assert_eq!(report(d.join("c/solve_report.json"))["seed"], 7);
}
