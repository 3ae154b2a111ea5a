use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracdfc"))
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

const SHORT_DUFFING: &str = "system = \"duffing\"\nt_end = 40.0\n";

#[test]
fn validate_gains_exit_codes() {
    let ok = run(bin().args(["validate-gains", "--alpha", "0.98", "--eta", "1,2"]));
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("admissible"));
    let bad = run(bin().args(["validate-gains", "--alpha", "0.98", "--eta", "-1,0"]));
    assert_eq!(bad.status.code(), Some(3));
    let invalid = run(bin().args(["validate-gains", "--alpha", "1.5", "--eta", "1,2"]));
    assert_eq!(invalid.status.code(), Some(2));
}

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "d.toml", SHORT_DUFFING);
    let out = dir.path().join("out");
    let res = run(bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("--plot"));
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2,u,u_eq,u_ad,u_s,S,e1,e2,theta_hat_1,theta_hat_2,theta_hat_3,theta_hat_4,k_hat,V\n"));
    assert_eq!(csv.lines().count(), 8000 + 2);
    assert!(out.join("metrics.toml").exists());
    assert!(out.join("k_hat.svg").exists());
    assert!(String::from_utf8_lossy(&res.stdout).contains("steady_state_error"));
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = config(dir.path(), "u.toml", "system = \"lorenz\"\n");
    assert_eq!(run(bin().args(["simulate", "--config"]).arg(&unknown)).status.code(), Some(2));
    let typo = config(dir.path(), "t.toml", "system = \"duffing\"\nsigma = 1\n");
    assert_eq!(run(bin().args(["simulate", "--config"]).arg(&typo)).status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(run(bin().args(["simulate", "--config"]).arg(&missing)).status.code(), Some(2));
    let eta = config(dir.path(), "e.toml", "system = \"duffing\"\neta = [-1.0, 0.0]\n");
    assert_eq!(run(bin().args(["simulate", "--config"]).arg(&eta)).status.code(), Some(3));
}

#[test]
fn divergence_exits_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    // huge negative-feedback gain blows up the explicit scheme
    let cfg = config(
        dir.path(),
        "b.toml",
        "system = \"duffing\"\ncontroller = \"linear_delayed\"\nK_baseline = [1e6, 1e6]\nt_end = 40.0\n",
    );
    let res = run(bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")));
    assert_eq!(res.status.code(), Some(4), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn unwritable_output_exits_with_code_5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "d.toml", SHORT_DUFFING);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let res = run(bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(blocker.join("sub")));
    assert_eq!(res.status.code(), Some(5));
}

#[test]
fn compare_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "d.toml", SHORT_DUFFING);
    let out = dir.path().join("cmp");
    let res = run(bin().args(["compare", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("adaptive/trajectory.csv").exists());
    assert!(out.join("linear/trajectory.csv").exists());
    assert!(out.join("comparison.toml").exists());

    let res = run(bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--param", "eta", "--values", "[1,2],[2,3]"]));
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = String::from_utf8_lossy(&res.stdout);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",ok")));
}
