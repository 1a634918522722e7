use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn rauzy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rauzy")).args(args).env_remove("RAUZY_SEED").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rauzy-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn step_examples() {
    let out = rauzy(&["step", "3/5", "1/4", "3/20", "--iters", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["outcome"], "continue");
    assert_eq!(recs[0]["winner"], 1);
    // Longest minus the other two, then renormalize by 1 − 2·(1/4 + 3/20) = 1/5.
    assert_eq!(recs[0]["lengths"], serde_json::json!(["1/3", "5/12", "1/4"]));

    let out = rauzy(&["step", "2/5", "7/20", "1/4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["records"][0]["outcome"], "hole");
    assert_eq!(v["records"][0]["iteration"], 1);

    let out = rauzy(&["step", "1/3", "1/3", "1/3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("TieEncountered"));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_input_exits_two() {
    for args in [
        &["step", "0.6", "0.25", "0.15"][..],
        &["step", "3/5", "1/4"],
        &["step", "1/2", "1/4", "1/5"],
        &["cylinders", "--floor", "0.01"],
        &["render", "--size", "63x100", "--out", "/dev/null"],
        &["dimension", "--levels", "9-4"],
        &["verify", "--suite", "nonsense"],
    ] {
        assert_eq!(rauzy(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn step_csv_has_a_row_per_record() {
    let out = rauzy(&["step", "3/5", "1/4", "3/20", "--accelerated", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "iteration,outcome,winner,n,length1,length2,length3,order");
    assert!(rows[1].starts_with("1,continue,1,1,1/3,5/12,1/4"));
    assert!(rows.last().unwrap().contains("hole"));
}

#[test]
fn graph_verdict_and_edges() {
    let v = json(&rauzy(&["graph"]));
    assert_eq!(v["verdict"], "connected");
    let edges = v["edges"].as_array().unwrap();
    let has = |from: [u8; 3], to: [u8; 3]| edges.iter().any(|e| e["from"] == serde_json::json!(from) && e["to"] == serde_json::json!(to));
    assert!(has([1, 2, 3], [2, 1, 3]));
    assert!(!has([1, 2, 3], [3, 2, 1]));
    let dot = String::from_utf8(rauzy(&["graph", "--format", "dot"]).stdout).unwrap();
    assert!(dot.contains("\"(1,2,3)\" -> \"(2,1,3)\""));
    assert!(!dot.contains("\"(1,2,3)\" -> \"(3,2,1)\""));
}

#[test]
fn verify_suites_pass() {
    let v = json(&rauzy(&["verify", "--suite", "lemma2"]));
    assert_eq!(v["passed"], true);
    let v = json(&rauzy(&["verify", "--suite", "partition", "--ncap", "16"]));
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["detail"]["total"].is_null() || c["detail"]["total"] == "1/1"));
    let out = rauzy(&["verify", "--suite", "kerckhoff", "--samples", "1000000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["provenance"]["seed"], 7);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["worst_margin"].as_f64().unwrap() > 0.0));
    for suite in ["lemma3", "roof-jacobian"] {
        let out = rauzy(&["verify", "--suite", suite, "--samples", "5000"]);
        assert_eq!(out.status.code(), Some(0), "{suite}");
    }
}

#[test]
fn seed_comes_from_the_environment() {
    let run = |env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_rauzy"));
        c.args(["distortion", "--pairs", "2000"]).env_remove("RAUZY_SEED");
        if let Some(s) = env {
            c.env("RAUZY_SEED", s);
        }
        json(&c.output().unwrap())
    };
    assert_eq!(run(Some("42"))["provenance"]["seed"], 42);
    assert_eq!(run(None)["provenance"]["seed"], 1);
}

#[test]
fn depth_one_bracket_holds_three_quarters() {
    let v = json(&rauzy(&["dimension", "--depth", "1"]));
    let b = &v["survivor_brackets"][1];
    assert!(b["lower"].as_f64().unwrap() <= 0.75 && 0.75 <= b["upper"].as_f64().unwrap());
    assert!(v["delta_hat"].is_null());
}

#[test]
fn small_dimension_run_bounds_below_two() {
    let cloud = tmp("cloud.bin");
    let r = rauzy(&["render", "--points", "200000", "--size", "64x64", "--out", tmp("c.pgm").to_str().unwrap(), "--cloud", cloud.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let out = rauzy(&["dimension", "--depth", "4", "--floor", "1e-8", "--levels", "4-8", "--cloud", cloud.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["ad_bound"].as_f64().unwrap() < 2.0);
    assert_eq!(v["provenance"]["samples_used"], 200_000);
    let out = rauzy(&["dimension", "--cloud", "/nonexistent/cloud.bin", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn render_is_deterministic_across_workers() {
    let (a, b) = (tmp("w1.pgm"), tmp("w8.pgm"));
    let oa = rauzy(&["render", "--points", "300000", "--size", "256x256", "--seed", "5", "--out", a.to_str().unwrap()]);
    let ob = rauzy(&["render", "--points", "300000", "--size", "256x256", "--seed", "5", "--workers", "8", "--out", b.to_str().unwrap()]);
    let (fa, fb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(fa.starts_with(b"P5\n"));
    assert_eq!(fa, fb);
    let (va, vb) = (json(&oa), json(&ob));
    assert_eq!(va["lit_pixels"], vb["lit_pixels"]);
    // All three corner sub-gaskets receive points.
    let corners = va["corner_points"].as_array().unwrap();
    assert!(corners.iter().all(|c| c.as_u64().unwrap() > 1000), "{corners:?}");
}

#[test]
fn one_point_lights_one_pixel() {
    let v = json(&rauzy(&["render", "--points", "1", "--size", "64x64", "--out", tmp("one.pgm").to_str().unwrap()]));
    assert_eq!(v["lit_pixels"], 1);
}

#[test]
fn tail_output_is_identical_across_workers() {
    let run = |w: &str| rauzy(&["tail", "--samples", "20000", "--seed", "3", "--workers", w, "--format", "csv"]).stdout;
    let one = run("1");
    assert_eq!(one, run("8"));
    let text = String::from_utf8(one).unwrap();
    assert!(text.lines().any(|l| l.starts_with("threshold")), "{text}");
    let v = json(&rauzy(&["tail", "--kind", "balance", "--samples", "5000"]));
    assert!(v["witness"].as_f64().is_some());
}

#[test]
fn cylinder_dump_sums_to_one() {
    let out = rauzy(&["cylinders", "--depth", "2", "--ncap", "4", "--floor", "1/1000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut total = rauzy_core::rational::int(0);
    for line in text.lines().skip(1) {
        let v: Value = serde_json::from_str(line).unwrap();
        total += rauzy_core::rational::parse_rational(v["measure"].as_str().unwrap()).unwrap();
    }
    assert_eq!(total, rauzy_core::rational::one());
}
