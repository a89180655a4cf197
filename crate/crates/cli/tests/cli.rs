use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

const TRIANGLE_IDENTITY: &str = r#"{
  "graph": {"vertices": ["a", "b", "c"], "edges": [["e1", "a", "b"], ["e2", "b", "c"], ["e3", "a", "c"]]},
  "matrix": {"labels": ["e1", "e2", "e3"], "rows": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]},
  "constraint": "tree"
}"#;

const K33: &str = r#"{
  "left": ["l1", "l2", "l3"],
  "right": ["r1", "r2", "r3"],
  "edges": [["l1","r1"],["l1","r2"],["l1","r3"],["l2","r1"],["l2","r2"],["l2","r3"],["l3","r1"],["l3","r2"],["l3","r3"]]
}"#;

const MD_IDENTITY_2: &str = r#"{"matrices": [
  {"rows": [["1", "0"], ["0", "1"]]},
  {"rows": [["1", "0"], ["0", "1"]]}
]}"#;

struct Run {
    _dir: TempDir,
    dir: PathBuf,
}

impl Run {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let path = dir.path().to_path_buf();
        Run { _dir: dir, dir: path }
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn treedpp(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_treedpp"))
            .args(args)
            .env_remove("DPP_MAX_ENUM")
            .output()
            .unwrap()
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn first_line(o: &Output) -> String {
    stdout(o).lines().next().unwrap_or_default().to_string()
}

#[test]
fn zt_of_identity_on_triangle_counts_its_trees() {
    let r = Run::new();
    let f = r.file("tri.json", TRIANGLE_IDENTITY);
    let out = r.treedpp(&["zt", &f]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(first_line(&out), "3");
}

#[test]
fn zf_and_znorm_on_triangle() {
    let r = Run::new();
    let f = r.file("tri.json", TRIANGLE_IDENTITY);
    // forests of C3: empty, three singletons, three pairs
    assert_eq!(first_line(&r.treedpp(&["zf", &f])), "7");
    assert_eq!(first_line(&r.treedpp(&["znorm", &f])), "8");
    assert_eq!(first_line(&r.treedpp(&["count-trees", &f])), "3");
}

#[test]
fn decimal_output_is_opt_in() {
    let r = Run::new();
    let f = r.file("tri.json", TRIANGLE_IDENTITY);
    let plain = stdout(&r.treedpp(&["zt", &f]));
    assert_eq!(plain.lines().count(), 1);
    let with = stdout(&r.treedpp(&["zt", &f, "--decimal", "3"]));
    assert_eq!(with.lines().nth(1), Some("3.000"));
}

#[test]
fn count_pm_on_k33() {
    let r = Run::new();
    let f = r.file("k33.json", K33);
    let out = r.treedpp(&["count-pm", &f]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(first_line(&out), "6");
    let via = r.treedpp(&["reduce-pm-zt", &f]);
    assert_eq!(via.status.code(), Some(0));
    assert_eq!(first_line(&via), "6");
}

#[test]
fn reduce_zt_zf_agrees_with_direct() {
    let r = Run::new();
    let f = r.file("tri.json", TRIANGLE_IDENTITY);
    let out = r.treedpp(&["reduce-zt-zf", &f]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(first_line(&out), "3");
}

#[test]
fn mixed_disc_and_apreduce_write_reports() {
    let r = Run::new();
    let f = r.file("md.json", MD_IDENTITY_2);
    let md = first_line(&r.treedpp(&["mixed-disc", &f]));
    let report = r.dir.join("report.json");
    let report_arg = report.to_string_lossy().into_owned();
    for cmd in ["apreduce-zt", "apreduce-zf"] {
        let out = r.treedpp(&[cmd, &f, "--epsilon", "1/2", "--json", &report_arg]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let parsed: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(parsed["zero"], false);
        assert_eq!(parsed["bounds_check"]["pass"], true);
        assert_eq!(parsed["bounds_check"]["reference"], md.as_str());
    }
}

#[test]
fn noisy_oracle_within_tolerance_passes() {
    let r = Run::new();
    let f = r.file("md.json", MD_IDENTITY_2);
    for seed in ["1", "2", "3"] {
        let out = r.treedpp(&["apreduce-zt", &f, "--oracle", "noisy", "--seed", seed, "--epsilon", "1/4"]);
        assert_eq!(out.status.code(), Some(0));
    }
    let adv = r.treedpp(&["apreduce-zf", &f, "--oracle", "adversarial", "--direction", "down"]);
    assert_eq!(adv.status.code(), Some(0));
}

#[test]
fn sample_prints_spanning_trees() {
    let r = Run::new();
    let f = r.file("tri.json", TRIANGLE_IDENTITY);
    let out = r.treedpp(&["sample", &f, "--seed", "7", "--count", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<Vec<String>> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|s| s.len() == 2));
}

#[test]
fn verify_passes_on_seed_42() {
    let r = Run::new();
    let out = r.treedpp(&["verify", "--seed", "42", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn malformed_input_exits_2() {
    let r = Run::new();
    let bad = r.file("bad.json", "{ not json");
    assert_eq!(r.treedpp(&["zt", &bad]).status.code(), Some(2));
    assert_eq!(r.treedpp(&["zt", "/nonexistent/file.json"]).status.code(), Some(2));
    let f = r.file("md.json", MD_IDENTITY_2);
    assert_eq!(r.treedpp(&["apreduce-zt", &f, "--epsilon", "3/2"]).status.code(), Some(2));
    assert_eq!(r.treedpp(&["apreduce-zt", &f, "--epsilon", "half"]).status.code(), Some(2));
    let tri = r.file("tri.json", TRIANGLE_IDENTITY);
    assert_eq!(r.treedpp(&["reduce-zt-zf", &tri, "--oracle", "noisy"]).status.code(), Some(2));
}

#[test]
fn exceeding_the_cap_exits_3() {
    let r = Run::new();
    let f = r.file("tri.json", TRIANGLE_IDENTITY);
    assert_eq!(r.treedpp(&["zt", &f, "--max-edges", "2"]).status.code(), Some(3));
    let env = Command::new(env!("CARGO_BIN_EXE_treedpp"))
        .args(["zf", &f])
        .env("DPP_MAX_ENUM", "2")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(3));
}
