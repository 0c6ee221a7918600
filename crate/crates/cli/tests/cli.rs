use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn spec(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../specs")
        .join(name);
    root.to_string_lossy().into_owned()
}

fn tiltlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiltlab"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn axioms_on_pure_spec() {
    let out = tiltlab(&[
        "axioms",
        "--spec",
        &spec("pure5.json"),
        "--prec",
        "6",
        "--depth",
        "3",
        "--samples",
        "200",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema"], 1);
    let ids: Vec<&str> = r["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["a", "b", "c", "d", "e", "f-1", "f-2", "g"]);
}

#[test]
fn sharp_of_p_flat() {
    let out = tiltlab(&[
        "sharp",
        "--spec",
        &spec("pure5.json"),
        "--layer",
        "0",
        "--depth",
        "4",
        "--element",
        "pflat",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["sharp"]["value"], "5");
    assert_eq!(r["sharp"]["effective_precision"], "6");
}

#[test]
fn ramify_table() {
    let out = tiltlab(&[
        "ramify", "--p", "5", "--m", "2", "--levels", "5", "--format", "md",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let md = String::from_utf8(out.stdout).unwrap();
    assert!(md.contains("| 0 | 2/5 | 2/5 | 4 |"));
    assert!(md.contains("| 3/25 | 2 | 2 | verified |"));
}

#[test]
fn tilt_presentation() {
    let out = tiltlab(&["tilt", "--spec", &spec("pure5.json"), "--layer", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["presentation"]["quotient_exponent"][0], 125);
}

#[test]
fn closure_on_small_pure_tower() {
    let out = tiltlab(&[
        "closure", "--p", "2", "--prec", "2", "--depth", "2", "--mode", "exact", "--ccap", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["layers"].as_array().unwrap().len(), 5);
}

#[test]
fn out_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("tiltlab-out-{}", std::process::id()));
    let path = dir.to_string_lossy().into_owned();
    let args = [
        "sharp",
        "--p",
        "5",
        "--depth",
        "2",
        "--element",
        "1 + pflat",
    ];
    let printed = tiltlab(&args).stdout;
    let mut with_out = args.to_vec();
    with_out.extend(["--out", &path]);
    assert_eq!(tiltlab(&with_out).status.code(), Some(0));
    assert_eq!(std::fs::read(&dir).unwrap(), printed);
    std::fs::remove_file(&dir).ok();
}

#[test]
fn usage_and_spec_errors_exit_two() {
    assert_eq!(tiltlab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tiltlab(&["axioms"]).status.code(), Some(2));
    assert_eq!(
        tiltlab(&["sharp", "--p", "5", "--element", "(("])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        tiltlab(&["axioms", "--spec", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        tiltlab(&[
            "sharp",
            "--p",
            "5",
            "--layer",
            "3",
            "--depth",
            "3",
            "--element",
            "1"
        ])
        .status
        .code(),
        Some(2)
    );
}
