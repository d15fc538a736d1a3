use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use drcc_core::instances::{save_instance, Instance, TransportationConfig, TransportationInstance};
use drcc_core::model::{parse_lp, parse_mps};

fn drcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drcc")).args(args).output().expect("run drcc")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn toy(dir: &Path) -> PathBuf {
    let p = dir.join("toy.json");
    let o = drcc(&["gen", "toy", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect::<Vec<_>>();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect::<Vec<_>>()).collect::<Vec<_>>();
    for r in &rows {
        assert_eq!(r.len(), header.len(), "{}", path.display());
    }
    (header, rows)
}

fn field(header: &[String], row: &[String], name: &str) -> String {
    row[header.iter().position(|h| h == name).unwrap()].clone()
}

#[test]
fn finite_toy_solves_at_the_root() {
    let dir = tempfile::tempdir().unwrap();
    let t = toy(dir.path());
    let out = dir.path().join("f");
    let o = drcc(&["solve", "--model", "finite", "--cuts", "ordering,star", s(&t), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out.join("report.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(field(&h, &rows[0], "nodes"), "1");
    assert_eq!(field(&h, &rows[0], "objective").parse::<f64>().unwrap(), 6.8);
    let (_, alphas) = read_csv(&out.join("alphas.csv"));
    assert_eq!(alphas.len(), 1);
    read_csv(&out.join("timings.csv"));
    let sol: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    assert_eq!(sol["status"], "optimal");
}

#[test]
fn continuous_solve_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let t = toy(dir.path());
    let (c, or) = (dir.path().join("c"), dir.path().join("o"));
    assert_eq!(code(&drcc(&["solve", "--model", "continuous", s(&t), "--gap", "1e-4", "--out", s(&c)])), 0);
    assert_eq!(code(&drcc(&["oracle", "--model", "continuous", s(&t), "--out", s(&or)])), 0);
    let (h, rows) = read_csv(&c.join("report.csv"));
    let z: f64 = field(&h, &rows[0], "objective").parse().unwrap();
    let oracle: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(or.join("oracle.json")).unwrap()).unwrap();
    let zo = oracle["objective"].as_f64().unwrap();
    assert!((z - zo).abs() <= 1e-5 * zo.abs().max(1.0), "{z} vs {zo}");
}

#[test]
fn deterministic_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let t = toy(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = drcc(&["solve", "--model", "continuous", s(&t), "--deterministic", "--out", s(out)]);
        assert_eq!(code(&o), 0);
    }
    for f in ["report.csv", "alphas.csv", "timings.csv", "solution.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema\": 1,").unwrap();
    let o = drcc(&["solve", "--model", "finite", s(&bad), "--out", s(&dir.path().join("x"))]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}

#[test]
fn missing_epsilon_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let t = toy(dir.path());
    let text = std::fs::read_to_string(&t).unwrap().replace("\"epsilon\": 0.4,", "");
    std::fs::write(&t, text).unwrap();
    let o = drcc(&["solve", "--model", "finite", s(&t), "--out", s(&dir.path().join("x"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon"));
}

#[test]
fn infeasible_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut t = TransportationInstance::canonical_toy();
    t.capacity = vec![5.0];
    let p = dir.path().join("tight.json");
    save_instance(&Instance::Transportation(t), &p).unwrap();
    let o = drcc(&["solve", "--model", "finite", s(&p), "--out", s(&dir.path().join("x"))]);
    assert_eq!(code(&o), 3);
}

#[test]
fn oracle_on_large_instance_hits_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("big.json");
    let inst = TransportationInstance::generate(&TransportationConfig::new(1, 4, 100, 50)).unwrap();
    save_instance(&Instance::Transportation(inst), &p).unwrap();
    for model in ["finite", "continuous"] {
        let o = drcc(&["oracle", "--model", model, s(&p), "--out", s(&dir.path().join("o"))]);
        assert_eq!(code(&o), 4, "{model}");
    }
}

#[test]
fn compare_needs_two_models() {
    let dir = tempfile::tempdir().unwrap();
    let t = toy(dir.path());
    let o = drcc(&["compare", "--model", "finite", s(&t), "--out", s(&dir.path().join("x"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compare_reports_dominance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let o = drcc(&[
        "compare",
        "--model",
        "finite,continuous",
        "--seeds",
        "1,2",
        "--sample-sizes",
        "10,20",
        "--suppliers",
        "2",
        "--customers",
        "1",
        "--out",
        s(&out),
        "--manifest",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out.join("compare.csv"));
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(field(&h, r, "dominance"), "ok");
        assert!(field(&h, r, "diff_continuous").parse::<f64>().unwrap() >= -1e-4);
    }
    let (_, summary) = read_csv(&out.join("compare_summary.csv"));
    assert_eq!(summary.len(), 2);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn lp_and_mps_exports_parse() {
    let dir = tempfile::tempdir().unwrap();
    let t = toy(dir.path());
    let lp = drcc(&["export", "--model", "continuous", s(&t), "--format", "lp"]);
    assert_eq!(code(&lp), 0);
    let m = parse_lp(&String::from_utf8(lp.stdout).unwrap()).unwrap();
    assert_eq!(m.cones.len(), 2);
    let mps = drcc(&["export", "--model", "finite", s(&t), "--format", "mps"]);
    assert_eq!(code(&mps), 0);
    parse_mps(&String::from_utf8(mps.stdout).unwrap()).unwrap();
    let conic = drcc(&["export", "--model", "continuous", s(&t), "--format", "mps"]);
    assert_eq!(code(&conic), 2);
    let lin = drcc(&["export", "--model", "continuous", s(&t), "--format", "mps", "--linearize-oa"]);
    assert_eq!(code(&lin), 0);
    let m = parse_mps(&String::from_utf8(lin.stdout).unwrap()).unwrap();
    assert!(m.rows.iter().any(|r| r.name.starts_with("oa_")));
}

#[test]
fn building_load_runs_period_by_period() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("b.json");
    let args = ["gen", "building", "--buildings", "3", "--periods", "3", "--samples", "6", "--out", s(&p)];
    assert_eq!(code(&drcc(&args)), 0);
    let out = dir.path().join("b");
    let o = drcc(&["solve", "--model", "continuous", s(&p), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.join("report.csv"));
    assert_eq!(rows.len(), 3);
    let (_, alphas) = read_csv(&out.join("alphas.csv"));
    assert_eq!(alphas.len(), 3);
    let o = drcc(&["oracle", "--model", "continuous", s(&p), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gen_is_deterministic() {
    let a = drcc(&["gen", "transportation", "--seed", "7", "--suppliers", "3", "--customers", "4", "--samples", "9"]);
    let b = drcc(&["gen", "transportation", "--seed", "7", "--suppliers", "3", "--customers", "4", "--samples", "9"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn threads_env_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let t = toy(dir.path());
    let out = dir.path().join("m");
    let o = Command::new(env!("CARGO_BIN_EXE_drcc"))
        .args(["solve", "--model", "finite", s(&t), "--manifest", "--out", s(&out)])
        .env("DRCC_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["threads"], 3);
}
