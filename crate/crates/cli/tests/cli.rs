use std::path::{Path, PathBuf};
use std::process::Command;

fn qholo(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qholo")).args(args).env_remove("QHOLO_CACHE_DIR").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn golden(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../golden").join(name).display().to_string()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn value<'a>(stdout: &'a str, key: &str) -> Option<&'a str> {
    stdout.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
}

#[test]
fn jones_checks_the_table_and_hashes_are_stable() {
    let (code, out, _) = qholo(&["jones", "--b", "3", "--n", "4"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(value(&out, "check.integrity"), Some("pass"));
    assert_eq!(value(&out, "ok"), Some("true"));
    let (_, again, _) = qholo(&["jones", "--b", "3", "--n", "4"]);
    assert_eq!(value(&out, "output.table.txt"), value(&again, "output.table.txt"));
    let (code, out, _) = qholo(&["jones", "--b", "1", "--n", "3", "--v0", "2"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn gb_and_fglm_on_a_small_ideal() {
    // annihilators of (-1)^n2
    let a = scratch("a.ops", "L1 - L2^2\n");
    let b = scratch("b.ops", "L2^2 - 1\n");
    let (code, out, err) = qholo(&["gb", "--op", &a, "--op", &b]);
    assert_eq!(code, 0, "{out}{err}");
    assert_eq!(value(&out, "rank"), Some("2"));
    assert_eq!(value(&out, "staircase"), Some("{1, L2}"));
    let (code, out, _) = qholo(&["gb", "--op", &a, "--op", &b, "--order", "lex"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(value(&out, "leads"), Some("{L2^2, L1}"));
    // these two generate the unit ideal
    let a = scratch("u1.ops", "L1 - q*M1*M2 - 1\n");
    let b = scratch("u2.ops", "(M2 + q)*L2^2 - M1*L2 - 1\n");
    let (_, out, _) = qholo(&["gb", "--op", &a, "--op", &b]);
    assert_eq!(value(&out, "rank"), Some("0"));
}

#[test]
fn fan_of_a_one_wall_ideal() {
    let a = scratch("w1.ops", "L1^2 - M1*L2\n");
    let b = scratch("w2.ops", "L2^2 - 1\n");
    let (code, out, _) = qholo(&["fan", "--op", &a, "--op", &b]);
    assert_eq!(code, 1, "{out}");
    assert_eq!(value(&out, "rays"), Some("(1,2)"));
    // a single wall is not swap-symmetric
    assert_eq!(value(&out, "check.swap_symmetric"), Some("fail"));
    let (code, _, _) = qholo(&["fan", "--op", &a, "--op", &b, "--out", &scratch_dir("fan")]);
    assert_eq!(code, 1);
}

fn scratch_dir(name: &str) -> String {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name).display().to_string()
}

#[test]
fn eps_of_golden_p1() {
    let p1 = golden("P1.ops");
    let (code, out, _) = qholo(&["eps", "--op", &p1, "--expect", "p1"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(value(&out, "check.matches"), Some("pass"));
    let (code, _, _) = qholo(&["eps", "--op", &p1, "--expect", "p2"]);
    assert_eq!(code, 1);
}

#[test]
fn verify_and_transport_golden_p1() {
    let p1 = golden("P1.ops");
    let (code, out, _) = qholo(&["guess", "verify", "--op", &p1, "--n", "5"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(value(&out, "points"), Some("36"));
    let (code, out, _) = qholo(&["guess", "verify", "--op", &p1, "--n", "20", "--v0", "2"]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = qholo(&["transport", "--op", &p1, "--c", "3", "--verify", "3"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(value(&out, "extended"), Some("false"));
    let (code, out, _) = qholo(&["transport", "--op", &p1, "--c", "1", "--verify", "2"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(value(&out, "extended"), Some("true"));
}

#[test]
fn a_wrong_operator_fails_verification() {
    let bad = scratch("bad.ops", "L1 - 1\n");
    let (code, out, _) = qholo(&["guess", "verify", "--op", &bad, "--n", "3"]);
    assert_eq!(code, 1);
    assert_eq!(value(&out, "check.annihilates"), Some("fail"));
}

#[test]
fn usage_errors_exit_with_2() {
    let (code, _, err) = qholo(&["pipeline", "--set", "no_such_option=1"]);
    assert_eq!(code, 2);
    assert!(err.contains("no_such_option"));
    let (code, _, _) = qholo(&["eps", "--op", "/nonexistent/x.ops"]);
    assert_eq!(code, 2);
    let bad = scratch("syntax.ops", "L1 +* 2\n");
    let (code, _, err) = qholo(&["eps", "--op", &bad]);
    assert_eq!(code, 2);
    assert!(err.contains("syntax.ops"));
}

#[test]
fn out_directory_gets_artifacts_and_manifest() {
    let dir = scratch_dir("jones-out");
    let (code, out, _) = qholo(&["jones", "--b", "3", "--n", "2", "--out", &dir]);
    assert_eq!(code, 0);
    let manifest = std::fs::read_to_string(Path::new(&dir).join("manifest.txt")).unwrap();
    assert_eq!(manifest, out);
    let table = std::fs::read_to_string(Path::new(&dir).join("table.txt")).unwrap();
    assert_eq!(value(&out, "output.table.txt").unwrap(), qholonomic::manifest::sha256_hex(&table));
}
