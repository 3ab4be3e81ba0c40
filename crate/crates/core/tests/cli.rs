use std::path::Path;
use std::process::{Command, Output};

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contingency-lab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = cli(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn every_verb_runs_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["build", "--seed", "3", "--out", "bank.json"]);
    ok(d, &["gen-dataset", "--bank", "bank.json", "--seed", "3", "--per-class", "30", "--sigma", "1e-3", "--out", "data.csv"]);
    let data = std::fs::read_to_string(d.join("data.csv")).unwrap();
    assert!(data.contains("# sigmas=0.001\n"));
    assert_eq!(data.lines().filter(|l| !l.starts_with('#')).count(), 121);

    ok(d, &["train", "--data", "data.csv", "--classifier", "knn", "--folds", "3", "--out", "knn.json"]);
    assert!(d.join("knn.cv.csv").exists());

    std::fs::write(d.join("sched.csv"), "0\n0\n").unwrap();
    ok(d, &["detect", "--bank", "bank.json", "--classifier", "knn.json", "--schedule", "sched.csv", "--out", "det.csv"]);
    let det = std::fs::read_to_string(d.join("det.csv")).unwrap();
    assert!(det.starts_with("# contingency-lab detection v1\n"));
    assert_eq!(det.lines().filter(|l| l.starts_with("0,0,normal,normal,") || l.starts_with("1,0,normal,normal,")).count(), 2);

    let random = ok(d, &["detect", "--bank", "bank.json", "--classifier", "knn.json", "--schedule", "random:8"]);
    assert_eq!(random.lines().filter(|l| !l.starts_with('#')).count(), 9);

    let spectra = ok(d, &["spectra", "--bank", "bank.json"]);
    assert_eq!(spectra.lines().filter(|l| l.ends_with("\"") && !l.starts_with('#')).count(), 94);
    let equiv = ok(d, &["equiv", "--bank", "bank.json", "--trials", "5"]);
    assert_eq!(equiv.lines().filter(|l| l.ends_with(",true")).count(), 3);
    let rank = ok(d, &["rank", "--bank", "bank.json"]);
    assert!(rank.contains("scenario_id,class,controllability,observability"));
}

#[test]
fn errors_are_machine_readable() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = cli(tmp.path(), &["spectra", "--bank", "nope.json"]);
    assert_eq!(missing.status.code(), Some(3));
    let stderr = String::from_utf8(missing.stderr).unwrap();
    assert!(stderr.starts_with("{\"error\":\"io\",\"message\":"), "{stderr}");

    std::fs::write(tmp.path().join("d.csv"), "window_id,scenario_id,class_label,E_1\n").unwrap();
    let bad = cli(tmp.path(), &["train", "--data", "d.csv", "--classifier", "lstm"]);
    assert_eq!(bad.status.code(), Some(2));
}
