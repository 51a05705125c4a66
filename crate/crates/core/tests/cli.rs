use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coverage-kit"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sample_size_prints_400() {
    let o = run(&["sample-size", "--epsilon", "0.15", "--delta", "0.1", "--c-lower", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "400");
    let manifest: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(manifest["command"], "sample-size");
}

#[test]
fn build_map_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let (out, svg) = (dir.path().join("map.result.json"), dir.path().join("map.svg"));
    let o = run(&[
        "build-map",
        fixture("eight_sites.scenario.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let result: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let area = result["coverage_area"].as_f64().unwrap();
    assert!(area > 0.0 && area < 400.0);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("map.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn render_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("out.svg");
    let o = run(&[
        "render",
        fixture("eight_sites.scenario.json").to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read(&svg).unwrap(),
        std::fs::read(fixture("eight_sites.svg")).unwrap()
    );
}

#[test]
fn optimize_rhc_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("r{k}.json"));
        let o = run(&[
            "optimize",
            "rhc",
            fixture("three_sinr.scenario.json").to_str().unwrap(),
            "--seed",
            "7",
            "--max-iterations",
            "300",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let r: serde_json::Value = serde_json::from_slice(&outputs[0]).unwrap();
    assert!(r["best_area"].as_f64().unwrap() > 0.0);
}

#[test]
fn exhaustive_over_budget_exits_3() {
    let o = run(&[
        "optimize",
        "exhaustive",
        fixture("three_sinr.scenario.json").to_str().unwrap(),
        "--levels",
        "50",
        "--budget",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scenario.json");
    std::fs::write(
        &bad,
        r#"{"model":"protocol","window":{"x0":0,"y0":0,"x1":1,"y1":1},
            "transmitters":[{"x":0.5,"y":0.5,"tx_radius":0.4,"int_radius":0.2}]}"#,
    )
    .unwrap();
    let o = run(&["build-map", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("transmitter 0"));
    assert_eq!(run(&["build-map", "/nonexistent.json"]).status.code(), Some(2));
    let o = bin()
        .args(["sample-size", "--epsilon", "0.1", "--delta", "0.1", "--c-lower", "1"])
        .env("COVERAGE_KIT_THREADS", "none")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dynamic_script_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dyn.json");
    let o = run(&[
        "dynamic",
        fixture("eight_sites.scenario.json").to_str().unwrap(),
        "--script",
        fixture("script.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["reports"].as_array().unwrap().len(), 4);

    let csv = dir.path().join("sweep.csv");
    let o = run(&[
        "sweep-power",
        fixture("three_sinr.scenario.json").to_str().unwrap(),
        "--levels",
        "4",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("power,area\n"));
}
