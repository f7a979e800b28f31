//! End-to-end runs of the `mfotl` binary on the bundled demo logs.

use std::path::PathBuf;
use std::process::{Command, Output};

fn demo(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo").join(name)
}

fn formula(name: &str) -> String {
    std::fs::read_to_string(demo(name)).unwrap().trim().to_string()
}

fn mfotl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfotl")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn monitor_best() {
    let log = demo("best.log");
    let o = mfotl(&["monitor", "-f", &formula("best.mfotl"), "-l", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "@0 (time point 0): (0)\n@0 (time point 0): (3)\n");
}

#[test]
fn monitor_piracy_from_stdin_to_file() {
    let dir = std::env::temp_dir().join(format!("mfotl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("piracy.out");
    let o = Command::new(env!("CARGO_BIN_EXE_mfotl"))
        .args(["monitor", "-f", &formula("piracy.mfotl"), "-o", out.to_str().unwrap()])
        .stdin(std::fs::File::open(demo("piracy.log")).unwrap())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        "@0 (time point 0): (1)\n@0 (time point 0): (2)\n@1 (time point 1): (2)\n"
    );
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn verify_piracy() {
    let log = demo("piracy.log");
    let o = mfotl(&["verify", "-f", &formula("piracy.mfotl"), "-l", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "2 time-points verified\n");
}

#[test]
fn check_reports_unsafe_formulas() {
    let o = mfotl(&["check", "-f", "NOT p(x)"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("issafe: false"));

    let o = mfotl(&["check", "-f", "HISTORICALLY[1,2] p(x)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("issafe: true\nsafe_formula: false"));

    let o = mfotl(&["--no-sugar", "check", "-f", "HISTORICALLY[1,2] p(x)"]);
    assert!(stdout(&o).starts_with("formula: NOT x0 = x0 TRIGGER[1,2] p(x0)\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(mfotl(&["check", "-f", "p(x) AND"]).status.code(), Some(1));
    assert_eq!(mfotl(&["check", "-f", "EVENTUALLY p(x)"]).status.code(), Some(2));
    let missing = mfotl(&["monitor", "-f", "p(x)", "-l", "/nonexistent/log"]);
    assert_eq!(missing.status.code(), Some(1));
    let unsafe_monitor = mfotl(&["monitor", "-f", "NOT p(x)", "-l", demo("best.log").to_str().unwrap()]);
    assert_eq!(unsafe_monitor.status.code(), Some(2));
}

#[test]
fn non_monotone_log_is_rejected() {
    let dir = std::env::temp_dir().join(format!("mfotl-cli-mono-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let log = dir.join("bad.log");
    std::fs::write(&log, "@3 p(1);\n@2 p(1);\n").unwrap();
    let o = mfotl(&["verify", "-f", "p(x)", "-l", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = mfotl(&["monitor", "-f", "p(x)", "-l", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::remove_dir_all(dir).unwrap();
}
