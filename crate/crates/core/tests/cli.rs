use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn lievprk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lievprk")).args(args).output().expect("failed to spawn lievprk")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_with(dir: &TempDir, command: &str, config: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = write_config(dir, "run.toml", config);
    let out = dir.path().join("out.csv");
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (lievprk(&args), out)
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).skip(1).map(String::from).collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const RIGID_BODY: &str = r#"
method = "sv"
t_span = [0.0, 1.0]
steps = 20
[model]
id = "rigid_body"
inertia = [1.0, 2.0, 3.0]
"#;

#[test]
fn simulate_writes_initial_row_plus_one_per_step() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_with(&dir, "simulate", RIGID_BODY, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 21);
    assert!(rows[0].starts_with("0,0.0000000000000000e0,"));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# method_id = sv"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("step,t,g_00,"));
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (_, out) = run_with(&dir, "simulate", RIGID_BODY, &["--seed", "5"]);
    let first = fs::read_to_string(&out).unwrap();
    let (_, out) = run_with(&dir, "simulate", RIGID_BODY, &["--seed", "5"]);
    assert_eq!(first, fs::read_to_string(&out).unwrap());
    let (_, out) = run_with(&dir, "simulate", RIGID_BODY, &["--seed", "6"]);
    assert_ne!(first, fs::read_to_string(&out).unwrap());
}

#[test]
fn debug_stages_adds_columns() {
    let dir = TempDir::new().unwrap();
    let (_, out) = run_with(&dir, "simulate", RIGID_BODY, &[]);
    let plain = data_rows(&out)[1].split(',').count();
    let (o, out) = run_with(&dir, "simulate", RIGID_BODY, &["--debug-stages"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(data_rows(&out)[1].split(',').count() > plain);
}

#[test]
fn zero_weight_tableau_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = "method = \"vprk\"\n[tableau]\na = [[0.0, 0.0], [1.0, 0.0]]\nb = [0.0, 1.0]\n";
    let (o, out) = run_with(&dir, "simulate", cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("b_1"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unknown_keys_and_bad_values_are_all_reported() {
    let dir = TempDir::new().unwrap();
    let cfg = "method = \"sv\"\nsteps = 0\nbogus = 1\nretraction = \"quaternion\"\n";
    let (o, _) = run_with(&dir, "simulate", cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for needle in ["steps", "bogus", "retraction"] {
        assert!(err.contains(needle), "missing {needle} in {err}");
    }
}

#[test]
fn newton_failure_exits_3_and_marks_the_file() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{RIGID_BODY}\n[numerics]\nnewton_max_iter = 1\n");
    let (o, out) = run_with(&dir, "simulate", &cfg, &[]);
    assert_eq!(o.status.code(), Some(3));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().last().unwrap().starts_with("# ABORTED at step 1:"));
}

#[test]
fn out_of_domain_exits_4() {
    let dir = TempDir::new().unwrap();
    let cfg = "method = \"ve_backward\"\nretraction = \"skew_sqrt\"\nt_span = [0.0, 1.0]\nsteps = 10\n[initial]\nxi = [10.0, 0.0, 0.0]\n";
    let (o, _) = run_with(&dir, "simulate", cfg, &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn converge_needs_four_step_sizes() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run_with(&dir, "converge", RIGID_BODY, &["--methods", "sv", "--h-list", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn converge_reports_slopes() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_with(&dir, "converge", RIGID_BODY, &["--methods", "sv,rk4", "--h-list", "0.1,0.05,0.025,0.0125"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let slope = |method: &str| -> f64 {
        let line = stdout.lines().find(|l| l.starts_with(&format!("{method}: slope "))).unwrap();
        line.split_whitespace().nth(2).unwrap().parse().unwrap()
    };
    assert!((slope("sv") - 2.0).abs() < 0.2, "{stdout}");
    assert!((slope("rk4") - 4.0).abs() < 0.2, "{stdout}");
    assert_eq!(data_rows(&out).len(), 8);
}

#[test]
fn compare_needs_two_methods() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run_with(&dir, "compare", RIGID_BODY, &["--methods", "sv"]);
    assert_eq!(o.status.code(), Some(2));
    let (o, out) = run_with(&dir, "compare", RIGID_BODY, &["--methods", "sv,rk4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("sv,") && rows[1].starts_with("rk4,"));
}

#[test]
fn poincare_requires_a_section() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run_with(&dir, "poincare", RIGID_BODY, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("section"));
}

#[test]
fn poincare_without_crossings_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{RIGID_BODY}\n[section]\ncoordinate = \"xi_0\"\nlevel = 100.0\ndirection = 1\n");
    let (o, out) = run_with(&dir, "poincare", &cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(data_rows(&out).is_empty());
    let header = fs::read_to_string(&out).unwrap().lines().find(|l| !l.starts_with('#')).unwrap().to_string();
    assert!(header.starts_with("t,mu_0,"));
}

#[test]
fn poincare_finds_crossings() {
    let dir = TempDir::new().unwrap();
    let cfg = "method = \"sv\"\nt_span = [0.0, 50.0]\nsteps = 2000\n[section]\ncoordinate = \"xi_0\"\nlevel = 0.0\ndirection = 1\n[initial]\nxi = [0.1, 1.0, 0.3]\n";
    let (o, out) = run_with(&dir, "poincare", cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&out);
    assert!(!rows.is_empty());
    for r in rows {
        let xi0: f64 = r.split(',').nth(4).unwrap().parse().unwrap();
        assert!(xi0.abs() < 1e-12);
    }
}

#[test]
fn selftest_detects_a_corrupted_series() {
    let o = lievprk(&["selftest", "--corrupt-bernoulli"]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("FAIL dexp^-1 series")), "{stdout}");
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        lievprk::run::RunConfig::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
