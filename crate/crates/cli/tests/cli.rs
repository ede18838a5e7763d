use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use povm_order::povm::{make_mub_qubit_complete, make_qubit_dichotomic, make_trine, PovmFile};
use povm_order::Povm;
use serde_json::Value;

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("povm-order-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &PathBuf, name: &str, p: &Povm) -> String {
    let path = dir.join(name);
    fs::write(&path, PovmFile::from_povm(p).to_json()).unwrap();
    path.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_povm-order"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn trine_is_incompatible_at_three_quarters() {
    let dir = workdir("trine");
    let files: Vec<String> = make_trine(0.75)
        .unwrap()
        .iter()
        .enumerate()
        .map(|(k, p)| write(&dir, &format!("trine{k}.json"), p))
        .collect();
    let mut args = vec!["incompat"];
    args.extend(files.iter().map(String::as_str));
    let out = run(&args);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["verdict"], "incompatible");
    assert!(v["height"].as_f64().unwrap() > 2.0);
    assert_eq!(v["threshold"].as_f64().unwrap(), 2.0);
    assert!(v["margin"].as_f64().unwrap() > 0.0);

    args.push("--pgm");
    let v = json_of(&run(&args));
    assert_eq!(v["criterion"], "pgm");
    assert!(v["margin"].is_number());
}

#[test]
fn order_with_itself_is_equivalent() {
    let dir = workdir("order");
    let a = write(&dir, "a.json", &make_trine(0.6).unwrap()[0]);
    let out = run(&["order", &a, &a]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["relation"], "equivalent");
}

#[test]
fn sharp_mub_pair_has_height_three() {
    let dir = workdir("mub");
    let x = write(&dir, "x.json", &make_qubit_dichotomic(1.0, [1.0, 0.0, 0.0]).unwrap());
    let z = write(&dir, "z.json", &make_qubit_dichotomic(1.0, [0.0, 0.0, 1.0]).unwrap());
    let out = run(&["height", &x, &z, "--certificate"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert!((v["value"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert_eq!(v["certificate"]["dual_y"].as_array().unwrap().len(), 2);

    let v = json_of(&run(&["outcome-bound", &x, &z]));
    assert_eq!(v["min_outcomes"], 3);
}

#[test]
fn simplify_output_revalidates() {
    let dir = workdir("simplify");
    let mub = make_mub_qubit_complete();
    let src = write(&dir, "mub.json", &mub);
    let out = run(&["simplify", &src]);
    assert!(out.status.success());
    let simple = dir.join("simple.json");
    fs::write(&simple, &out.stdout).unwrap();
    let out = run(&["validate", simple.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["valid"], true);
    assert_eq!(v["outcomes"], v["simple_length"]);
}

#[test]
fn invalid_effect_exits_with_validation_code() {
    let dir = workdir("invalid");
    let path = dir.join("bad.json");
    let bad = r#"{"dim": 2, "effects": [
        [[[1.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]],
        [[[-0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]
    ]}"#;
    fs::write(&path, bad).unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v = json_of(&out);
    assert!(v["error"].as_str().unwrap().contains("effect 1"), "{v}");

    let out = run(&["validate", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fisher_trace_and_bloch_rho() {
    let dir = workdir("fisher");
    let z = write(&dir, "z.json", &make_qubit_dichotomic(0.7, [0.0, 0.0, 1.0]).unwrap());
    let v = json_of(&run(&["fisher", &z]));
    assert!((v["trace"].as_f64().unwrap() - (1.0 + 0.49)).abs() < 1e-10);
    let v = json_of(&run(&["fisher", &z, "--rho", "0,0,0.5", "--truncated"]));
    assert_eq!(v["morphism"], "fisher_truncated");
    let out = run(&["fisher", &z, "--rho", "0,0,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn joint_pair_feasibility() {
    let dir = workdir("joint");
    let x = write(&dir, "x.json", &make_qubit_dichotomic(0.6, [1.0, 0.0, 0.0]).unwrap());
    let z = write(&dir, "z.json", &make_qubit_dichotomic(0.6, [0.0, 0.0, 1.0]).unwrap());
    let v = json_of(&run(&["joint", &x, &z]));
    assert_eq!(v["feasible"], true);
    assert_eq!(v["joint"]["effects"].as_array().unwrap().len(), 4);
    let x = write(&dir, "x9.json", &make_qubit_dichotomic(0.9, [1.0, 0.0, 0.0]).unwrap());
    let z = write(&dir, "z9.json", &make_qubit_dichotomic(0.9, [0.0, 0.0, 1.0]).unwrap());
    let v = json_of(&run(&["joint", &x, &z]));
    assert_eq!(v["feasible"], false);
    assert!(v["upper_bound"].as_f64().unwrap() < 0.0);
}

#[test]
fn ft_presets() {
    let v = json_of(&run(&["ft", "--etas", "0.66,0.66,0.66", "--axes", "trine"]));
    assert_eq!(v["compatible"], true);
    let v = json_of(&run(&["ft", "--etas", "0.6,0.6,0.6", "--axes", "xyz"]));
    assert_eq!(v["compatible"], false);
    let v = json_of(&run(&["ft", "--etas", "0.5,0.5,0.5", "--axes", "0,0,1;1,0,0;0,1,0"]));
    assert_eq!(v["compatible"], true);
    assert!(v["margin"].as_f64().unwrap() < 0.0);
}

#[test]
fn scan_csv_and_json() {
    let out = run(&["--format", "csv", "scan", "fourier", "--d", "2", "--grid", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "s,t,height,zhu_verdict,analytic_flag,oracle_verdict");
    assert_eq!(lines.count(), 25);

    let v = json_of(&run(&["scan", "planar", "--m", "2", "--grid", "3"]));
    assert_eq!(v["records"].as_array().unwrap().len(), 3);

    let out = run(&["scan", "qubit-triple", "--sweep", "bogus", "--grid", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn human_format_prints_margin() {
    let dir = workdir("human");
    let x = write(&dir, "x.json", &make_qubit_dichotomic(0.5, [1.0, 0.0, 0.0]).unwrap());
    let z = write(&dir, "z.json", &make_qubit_dichotomic(0.5, [0.0, 0.0, 1.0]).unwrap());
    let out = run(&["--format", "human", "incompat", &x, &z]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("inconclusive"));
    assert!(text.contains("margin"));
}
