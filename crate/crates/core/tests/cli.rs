mod common;

use std::path::Path;
use std::process::{Command, Output};

use riskset::cli::{read_reports, render, Format};
use riskset::consistency::{CheckReport, Verdict};
use riskset::num::{parse_rat, rat, Rat};
use riskset::riskmeasures::shp::shp_lp_contains;
use riskset::riskmeasures::RiskModel;
use serde_json::Value as Json;

fn riskset(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_riskset"));
    c.args(args);
    if let Some(t) = threads {
        c.env("RISKSET_THREADS", t);
    }
    c.output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const AVAR_T1: &str = r#"{
  "name": "one-step",
  "tree": {"branching": [3], "d": 2, "m": 2},
  "portfolios": {"X": {"r0": ["3", "-1"], "r1": ["-2", "0"], "r2": ["1/2", "4"]}},
  "model": {"type": "avar", "levels": [["1/2", "1/3"]]}
}"#;

#[test]
fn compute_avar_corners() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "a.json", AVAR_T1);
    let csv = dir.path().join("a.csv");
    let out = riskset(&["compute", path(&inst), "--csv", path(&csv)], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let j: Json = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["model"], "avar-composed");
    assert!(j.get("runtime_ms").is_none());
    let process = j["process"].as_array().unwrap();
    let corner = |node: &str| -> Vec<Rat> {
        let e = process.iter().find(|e| e["node"] == node).unwrap();
        e["corner"].as_array().unwrap().iter().map(|v| parse_rat(v.as_str().unwrap()).unwrap()).collect()
    };
    let p = vec![rat(1, 3); 3];
    let x = [[rat(3, 1), rat(-1, 1)], [rat(-2, 1), rat(0, 1)], [rat(1, 2), rat(4, 1)]];
    let levels = [rat(1, 2), rat(1, 3)];
    let want: Vec<Rat> = (0..2).map(|i| common::avar_greedy(&p, &x.iter().map(|r| -r[i].clone()).collect::<Vec<_>>(), &levels[i])).collect();
    assert_eq!(corner("r"), want);
    assert_eq!(corner("r2"), vec![rat(-1, 2), rat(-4, 1)]);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("node,t,kind,index,x1,x2\n"));
    assert_eq!(table.lines().filter(|l| l.contains(",corner,")).count(), 4);
}

#[test]
fn compute_entropic_float_corners() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "e.json",
        r#"{"tree": {"branching": [2], "d": 1, "m": 1},
            "portfolios": {"X": {"r0": ["1"], "r1": ["-1"]}},
            "model": {"type": "entropic", "rates": [1.0]}}"#,
    );
    let out = riskset(&["compute", path(&inst)], None);
    assert_eq!(out.status.code(), Some(0));
    let j: Json = serde_json::from_slice(&out.stdout).unwrap();
    let root = &j["process"][0];
    assert_eq!(root["node"], "r");
    let v = root["float_corner"][0].as_f64().unwrap();
    assert!((v - 1f64.cosh().ln()).abs() < 1e-12);
}

#[test]
fn compute_shp_vertices_are_superhedging() {
    let file = common::instance_path("shp_bid_ask.json");
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let out = riskset(&["compute", path(&file), "--csv", path(&csv)], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let inst = common::instance("shp_bid_ask.json");
    let RiskModel::Shp { market } = inst.engine.model() else { panic!() };
    let (_, x) = &inst.portfolios[0];
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut seen = 0;
    for line in table.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[2] != "vertex" && f[2] != "ray" {
            continue;
        }
        let n = inst.tree().node_by_name(f[0]).unwrap();
        let u: Vec<Rat> = f[4..].iter().map(|s| parse_rat(s).unwrap()).collect();
        assert!(shp_lp_contains(inst.tree(), market, x, n, &u, f[2] == "ray"), "{line}");
        seen += 1;
    }
    assert!(seen > 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = common::instance_path("avar_tree.json");
    let bad = common::instance_path("avar_counterexample.json");
    assert_eq!(riskset(&["check", path(&good)], None).status.code(), Some(0));
    assert_eq!(riskset(&["check", path(&bad)], None).status.code(), Some(1));
    let broken = write(dir.path(), "b.json", "{\"tree\": ");
    assert_eq!(riskset(&["check", path(&broken)], None).status.code(), Some(2));
    assert_eq!(riskset(&["compute", path(&broken)], None).status.code(), Some(2));
    assert_eq!(riskset(&["check", "/nonexistent/x.json"], None).status.code(), Some(2));
    assert_eq!(riskset(&["check", path(&good), "--checks", "nope"], None).status.code(), Some(2));
    assert_eq!(riskset(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(riskset(&["check", path(&good)], Some("zero")).status.code(), Some(2));
}

#[test]
fn outputs_do_not_depend_on_threads() {
    for name in ["avar_tree.json", "entropic_tree.json", "avar_counterexample.json"] {
        let file = common::instance_path(name);
        let one = riskset(&["check", path(&file), "--pairs", "5", "--seed", "3"], Some("1"));
        let many = riskset(&["check", path(&file), "--pairs", "5", "--seed", "3"], Some("4"));
        assert!(!one.stdout.is_empty());
        assert_eq!(one.stdout, many.stdout, "{name}");
        let c1 = riskset(&["compute", path(&file)], Some("1"));
        let c2 = riskset(&["compute", path(&file)], Some("3"));
        assert_eq!(c1.stdout, c2.stdout, "{name}");
    }
}

#[test]
fn timings_only_when_asked() {
    let file = common::instance_path("avar_tree.json");
    let plain = riskset(&["check", path(&file), "--checks", "cocycle-beta"], None);
    assert!(!String::from_utf8_lossy(&plain.stdout).contains("runtime_ms"));
    let timed = riskset(&["check", path(&file), "--checks", "cocycle-beta", "--timings"], None);
    let j: Json = serde_json::from_slice(&timed.stdout).unwrap();
    assert!(j["reports"].as_array().unwrap().iter().all(|r| r["runtime_ms"].is_number()));
}

#[test]
fn witnesses_recheck_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let file = common::instance_path("avar_counterexample.json");
    let res = riskset(&["check", path(&file), "--out", path(&out)], None);
    assert_eq!(res.status.code(), Some(1));
    assert!(res.stdout.is_empty());
    let reports = read_reports(&out).unwrap();
    let witnesses: Vec<_> = reports.iter().filter_map(|r| r.witness.as_ref()).collect();
    assert!(!witnesses.is_empty());
    for w in witnesses {
        assert!(w.verified);
        assert_eq!(w.recheck(), Some(true), "{w:?}");
    }
    assert!(reports.iter().any(|r| r.check == "mptc-direct" && r.verdict == Verdict::Fail && r.note.as_deref().is_some_and(|n| n.contains("strict inclusion"))));
}

fn report(check: &str, verdict: Verdict) -> CheckReport {
    CheckReport {
        check: check.into(),
        model: "avar".into(),
        portfolio: None,
        pair: Some(0),
        t: 0,
        s: Some(1),
        verdict,
        gap: None,
        witness: None,
        note: None,
        runtime_ms: None,
    }
}

#[test]
fn report_rendering() {
    let md = render(&[], Format::Md).unwrap();
    assert!(md.contains("## Summary") && md.contains("## Reports"));
    assert_eq!(render(&[], Format::Csv).unwrap().lines().count(), 1);

    let rs = vec![report("cocycle-beta", Verdict::Pass), report("cocycle-beta", Verdict::Fail), report("weak-duality", Verdict::Skipped)];
    let md = render(&rs, Format::Md).unwrap();
    assert!(md.contains("| cocycle-beta | 1 | 1 | 0 |"));
    assert!(md.contains("| weak-duality | 0 | 0 | 1 |"));
    assert_eq!(render(&rs, Format::Csv).unwrap().lines().count(), 4);
    let j: Json = serde_json::from_str(&render(&rs, Format::Json).unwrap()).unwrap();
    assert_eq!(j["summary"][0]["fail"], 1);

    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", &serde_json::to_string(&rs[..1]).unwrap());
    let b = dir.path().join("b.json");
    riskset(&["check", path(&common::instance_path("entropic_tree.json")), "--checks", "cocycle-beta", "--out", path(&b)], None);
    let out = riskset(&["report", path(&a), path(&b), "--format", "csv"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 1 + read_reports(&b).unwrap().len());
    assert!(text.contains(",entropic,"));
}
