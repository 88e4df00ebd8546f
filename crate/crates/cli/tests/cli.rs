use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn primwalk(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_primwalk"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn data(path: &Path) -> Value {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["data"].clone()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_measure_eta2() {
    let dir = tempfile::tempdir().unwrap();
    let o = primwalk(dir.path(), &["check-measure", "--measure", "eta2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = data(&dir.path().join("check_measure.json"));
    assert_eq!(d["valid"], true);
    assert_eq!(d["first_moment"]["exact"], "1/1");
    assert_eq!(d["generation"]["kind"], "Generates");
}

#[test]
fn connect_writes_a_replayable_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = primwalk(dir.path(), &["connect", "--target", "2,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = data(&dir.path().join("connect.json"));
    assert_eq!(d["verified"], true);
    let csv = std::fs::read_to_string(dir.path().join("connect.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(last.ends_with(",2,3"), "{last}");
}

#[test]
fn zero_trials_exit_one_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = primwalk(&out, &["endpoint", "--measure", "nu", "--dim", "2", "--steps", "3", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn non_primitive_target_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = primwalk(dir.path(), &["connect", "--target", "2,4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(primwalk(dir.path(), &["endpoint", "--bogus"]).status.code(), Some(1));
    assert_eq!(primwalk(dir.path(), &["figure", "--measure", "eta3", "--k", "3"]).status.code(), Some(1));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "measure = \"nu\"\ndim = 2\nsteps = 2\ntrials = 50\nz0 = [0, 0]\nseed = 3\n").unwrap();
    let out = dir.path().join("out");
    let o = primwalk(&out, &["endpoint", "--config", cfg.to_str().unwrap(), "--trials", "80"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m: Value = serde_json::from_str(&std::fs::read_to_string(out.join("endpoint.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["trials"], 80);
    assert_eq!(m["config"]["steps"], 2);
    assert_eq!(m["seed"], 3);
}

#[test]
fn unknown_config_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "measure = \"nu\"\ntrails = 5\n").unwrap();
    let o = primwalk(dir.path(), &["endpoint", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`trails`"));
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["cesaro", "--measure", "nu", "--dim", "2", "--steps", "5", "--trials", "3000", "--seed", "9"];
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let mut a = args.to_vec();
        a.extend(["--threads", threads]);
        let o = primwalk(&out, &a);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        files.push(std::fs::read(out.join("cesaro.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_primwalk"))
        .args(["check-measure", "--measure", "nu", "--dim", "3"])
        .env("PRIMWALK_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("check_measure.manifest.json").exists());
}
