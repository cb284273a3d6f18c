use std::path::PathBuf;
use std::process::{Command, Output};

fn typetwo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_typetwo")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifests() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../manifests")
}

#[test]
fn solve_prints_the_ideal_answer() {
    let o = typetwo(&["solve", "sort", "--input", "010:1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("001"));
    let o = typetwo(&["solve", "lpo", "--input", ":0"]);
    assert!(o.status.success());
}

#[test]
fn domain_errors_exit_with_two() {
    let o = typetwo(&["solve", "cn", "--input", "set:{}"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_command_is_a_usage_error() {
    assert_eq!(typetwo(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn shipped_program_runs() {
    let o = typetwo(&["run-machine", "shipped:idq", "--inputs", "rat:3/4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("halted (3, 4)"));
}

#[test]
fn reduce_reports_every_stage() {
    let o = typetwo(&["reduce", "R20", "--input", "0:0|1:0|01:1"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn verify_one_suite_passes() {
    let o = typetwo(&["verify", "--suite", "R3"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn sampled_verification_is_deterministic() {
    let args = ["--seed", "3", "verify", "--suite", "R19", "--sample", "5"];
    let (a, b) = (typetwo(&args), typetwo(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn corrupted_witnesses_fail() {
    let path = manifests().join("negative.manifest");
    let o = typetwo(&["verify", "--manifest", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    for id in ["R19", "R3a", "R15", "R13", "R22"] {
        assert!(out.contains(&format!("{id}/corrupt")), "{out}");
    }
}

#[test]
fn unknown_manifest_id_is_rejected_before_running() {
    let dir = std::env::temp_dir().join(format!("typetwo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.manifest");
    std::fs::write(&path, "R19 1:0\nR99 1:0\n").unwrap();
    let o = typetwo(&["verify", "--manifest", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("R99"));
}

#[test]
fn catalog_lists_every_witness() {
    let o = typetwo(&["catalog"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for id in ["R1", "R3j", "R12b", "R26", "idq"] {
        assert!(out.contains(id), "{id} missing");
    }
}

#[test]
fn sampled_entries_are_in_the_shipped_manifest() {
    let shipped = std::fs::read_to_string(manifests().join("default.manifest")).unwrap();
    let o = typetwo(&["sample", "--per-entry", "30"]);
    assert!(o.status.success());
    for line in stdout(&o).lines().filter(|l| !l.starts_with('#')) {
        assert!(shipped.lines().any(|s| s == line), "{line}");
    }
}
