use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const EXAMPLE: &str = "TSLP2D v1\nstart S\nA T 0\nB T 1\nX H A B\nY HV T X 1 2\nS A Y X\n";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gridslp"));
    c.env_remove("GRIDSLP_MAX_CELLS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(ok(args).trim()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn example_stats_expand_access() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ex.tslp", EXAMPLE);
    let st = json(&["stats", s(&f)]);
    assert_eq!(st["symbols"], 5);
    assert_eq!(st["height"], 2);
    assert_eq!(st["width"], 2);
    assert_eq!(st["holed"], true);
    assert_eq!(ok(&["expand", s(&f)]), "01\n01\n");
    for fast in [false, true] {
        let mut args = vec!["access", s(&f), "2", "2"];
        if fast {
            args.extend(["--fast", "--epsilon", "3"]);
        }
        assert_eq!(json(&args)["char"], "1");
    }
    assert_eq!(run(&["access", s(&f), "3", "1"]).status.code(), Some(1));
}

#[test]
fn spiral_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let sp = dir.path().join("sp.slp");
    ok(&["gen", "--gadget", "spiral", "--n", "1024", "--c", "1", "-o", s(&sp)]);
    let st = json(&["stats", s(&sp)]);
    assert_eq!((st["height"].as_u64(), st["width"].as_u64()), (Some(1024), Some(1024)));

    let bal = dir.path().join("sp.tslp");
    let stats = json(&["balance", s(&sp), "-o", s(&bal)]);
    assert!(stats["outputDepth"].as_u64().unwrap() < stats["inputDepth"].as_u64().unwrap());
    let v = json(&["verify", s(&sp), "--against", s(&bal)]);
    assert_eq!((v["equal"].as_bool(), v["method"].as_str()), (Some(true), Some("full")));

    // a tiny cap forces the sampled comparison
    let out = bin().args(["verify", s(&sp), "--against", s(&bal), "--samples", "300"]).env("GRIDSLP_MAX_CELLS", "10").output().unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["method"], "sampled");

    let rb = dir.path().join("rb.slp");
    ok(&["rebalance", s(&sp), "-o", s(&rb)]);
    assert_eq!(run(&["verify", s(&sp), "--against", s(&rb)]).status.code(), Some(0));
}

#[test]
fn verify_detects_difference() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.slp", "SLP2D v1\nstart X\nA T 0\nB T 1\nX H A B\n");
    let b = write(dir.path(), "b.slp", "SLP2D v1\nstart X\nA T 0\nB T 1\nX H B A\n");
    assert_eq!(run(&["verify", s(&a), "--against", s(&a)]).status.code(), Some(0));
    let out = run(&["verify", s(&a), "--against", s(&b)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.slp", "SLP2D v1\nstart X\nA T 0\nB T 1\nC V A B\nX H A C\n");
    let out = run(&["stats", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("symbol X (id 3)"), "{err}");
    assert_eq!(run(&["stats"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--gadget", "cnm", "--n", "64"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--gadget", "spiral", "--n", "1000"]).status.code(), Some(2));
}

#[test]
fn expansion_cap_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("sb.slp");
    ok(&["gen", "--gadget", "shiftbin", "--n", "3", "-o", s(&f)]);
    assert_eq!(ok(&["expand", s(&f)]).lines().count(), 16);
    let out = bin().args(["expand", s(&f)]).env("GRIDSLP_MAX_CELLS", "100").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(run(&["expand", s(&f), "--max-cells", "640"]).status.success());
}

#[test]
fn transforms_preserve_content() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.slp");
    ok(&["gen", "--gadget", "cnm", "--n", "40", "--m", "24", "--normalize", "-o", s(&f)]);
    let m = ok(&["expand", s(&f)]);
    let rows: Vec<&str> = m.lines().collect();

    let r4 = dir.path().join("r4.slp");
    ok(&["rotate", s(&f), "--times", "4", "-o", s(&r4)]);
    assert_eq!(ok(&["expand", s(&r4)]), m);

    let top = dir.path().join("top.slp");
    ok(&["margins", s(&f), "--side", "top", "-o", s(&top)]);
    assert_eq!(ok(&["expand", s(&top)]).trim_end(), rows[0]);

    let lin = dir.path().join("lin.slp");
    ok(&["linearize", s(&f), "-o", s(&lin)]);
    assert_eq!(ok(&["expand", s(&lin)]).trim_end(), rows.concat());

    // tall input goes through rotation
    let rb = dir.path().join("rb.slp");
    ok(&["rebalance", s(&f), "-o", s(&rb)]);
    assert_eq!(ok(&["expand", s(&rb)]), m);
}

#[test]
fn deterministic_outputs() {
    let a = ok(&["gen", "--gadget", "random", "--g", "30", "--seed", "9"]);
    let b = ok(&["gen", "--gadget", "random", "--g", "30", "--seed", "9"]);
    assert_eq!(a, b);
    let seq = ok(&["gen", "--gadget", "cnmseq", "--n", "64", "--m", "64", "--b", "8", "--k", "3"]);
    assert!(seq.contains("start C3"));
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "sb.slp", &ok(&["gen", "--gadget", "shiftbin", "--n", "5"]));
    let r1 = json(&["bench", s(&f), "--queries", "400", "--seed", "3"]);
    let r2 = json(&["bench", s(&f), "--queries", "400", "--seed", "3", "--threads", "4"]);
    let visits = |r: &Value| {
        r["paths"].as_array().unwrap().iter().map(|p| (p["path"].clone(), p["meanVisits"].clone(), p["maxVisits"].clone())).collect::<Vec<_>>()
    };
    assert_eq!(visits(&r1), visits(&r2));
    assert_eq!(r1["paths"].as_array().unwrap().len(), 3);
}
