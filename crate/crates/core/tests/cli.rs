use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dof3wc"));
    cmd.env_remove("DOF3WC_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn compare_bounds_gap_example() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"M":[4,2,2],"tau":"1/2"}"#);
    let out = run(&["compare-bounds", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.trim_start().starts_with("{\n  \"manifest\""));
    let v = json_out(&out);
    assert_eq!(v["genie_max_sum"], "4");
    assert_eq!(v["formula"], "4");
    let cut: Vec<i64> = v["cutset_max_sum"]
        .as_str()
        .unwrap()
        .split('/')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!(cut[0] >= 6 * cut.get(1).copied().unwrap_or(1));
}

#[test]
fn sumdof_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"M":[5,7,4],"tau":[1,2]}"#);
    let out = run(&["sumdof", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_out(&out);
    assert_eq!(v["match"], true);
    assert_eq!(v["lp"], v["closed_form"]);
}

#[test]
fn allocate_beamform_simulate_pipeline() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"M":[5,7,4],"tau":"1/2"}"#);
    let alloc_path = dir.path().join("a.json");
    let out = run(&[
        "allocate",
        "--config",
        s(&cfg),
        "--dof",
        "1/2,0,1/2,4,0,4",
        "--out",
        s(&alloc_path),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&alloc_path).unwrap()).unwrap();
    assert_eq!(v["verification"]["passed"], true);
    assert_eq!(v["allocation"]["gamma"][0], 2);

    let out = run(&[
        "beamform",
        "--config",
        s(&cfg),
        "--alloc",
        s(&alloc_path),
        "--seed",
        "3",
        "--snr-db",
        "60",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json_out(&out);
    assert_eq!(v["verification"]["gamma"][0], 2);
    assert_eq!(v["rates"].as_array().unwrap().len(), 5);

    let out = run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--alloc",
        s(&alloc_path),
        "--seeds",
        "3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: {"));
    assert_eq!(
        lines.next(),
        Some("stream_id,kind,snr_db,rate,slope,target,abs_err")
    );
    let row = text.lines().find(|l| l.starts_with("32,IA,120,")).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[5], "4");
    assert!(fields[6].parse::<f64>().unwrap() < 0.2);
}

#[test]
fn outside_region_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"M":[5,7,4],"tau":"1/2"}"#);
    let out = run(&["allocate", "--config", s(&cfg), "--dof", "9,9,9,9,9,9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"M":[5,7"#);
    let float_tau = write(&dir, "f.json", r#"{"M":[5,7,4],"tau":0.5}"#);
    assert_eq!(run(&["sumdof", "--config", s(&bad)]).status.code(), Some(2));
    assert_eq!(
        run(&["sumdof", "--config", s(&float_tau)]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["region", "--config", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    let out = run(&["region", "--form", "pentagon"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn outputs_are_reproducible_from_the_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"M":[3,3,3],"tau":"3/4"}"#);
    let alloc = write(
        &dir,
        "a.json",
        r#"{"L":1,"zf":{"12":0,"13":0,"21":0,"23":0,"31":0,"32":0},"ia":{"12":0,"13":1,"21":0,"23":0,"31":1,"32":0},"gamma":[0,1,0]}"#,
    );
    for args in [
        vec![
            "region",
            "--config",
            s(&cfg),
            "--form",
            "genie",
            "--format",
            "text",
        ],
        vec!["figure", "--id", "fig6"],
        vec!["beamform", "--config", s(&cfg), "--alloc", s(&alloc)],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(
            a.stdout.starts_with(b"# manifest: ") || a.stdout.starts_with(b"{\n  \"manifest\"")
        );
    }
}

#[test]
fn seed_env_overrides_default() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"M":[3,2,1],"tau":"1"}"#);
    let alloc = write(
        &dir,
        "a.json",
        r#"{"L":1,"zf":{"12":1,"13":0,"21":0,"23":0,"31":0,"32":0},"ia":{"12":0,"13":0,"21":0,"23":0,"31":0,"32":0},"gamma":[0,0,0]}"#,
    );
    let args = ["beamform", "--config", s(&cfg), "--alloc", s(&alloc)];
    let seed_of = |out: &Output| json_out(out)["manifest"]["seed"].as_u64().unwrap();
    assert_eq!(seed_of(&run(&args)), 1);
    let env = bin().args(args).env("DOF3WC_SEED", "42").output().unwrap();
    assert_eq!(seed_of(&env), 42);
    let explicit = bin()
        .args(args)
        .args(["--seed", "7"])
        .env("DOF3WC_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(seed_of(&explicit), 7);
    let bad = bin().args(args).env("DOF3WC_SEED", "x").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn figure_written_to_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("fig5.csv");
    let out = run(&["figure", "--id", "fig5", "--out", s(&path)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\ntau=1,10,7,9,1,18\n"));
    assert!(text.contains("\ntau=0,10,7,7,0,14\n"));
    assert!(text.contains("\"out\":"));
}
