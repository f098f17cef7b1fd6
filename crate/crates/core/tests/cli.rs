use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn goci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_goci")).args(args).output().expect("run goci")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn induce_then_replay_reproduces_the_theory() {
    let dir = tempfile::tempdir().unwrap();
    let (facts, truth) = (data("lshape.facts"), data("lshape_truth.thy"));
    let (log, first, second) = (dir.path().join("s.log"), dir.path().join("a.thy"), dir.path().join("b.thy"));
    let teacher = format!("--teacher=scripted:{}", path(&truth));
    let out = goci(&["induce", "-e", path(&facts), &teacher, "--log", path(&log), "-o", path(&first)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("queries=") && summary.contains("distance="), "{summary}");

    let log_text = std::fs::read_to_string(&log).unwrap();
    let kinds: Vec<&str> = log_text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["kind"].as_str().unwrap().to_owned())
        .map(|k| match k.as_str() {
            "hello" => "hello",
            "done" => "done",
            _ => "other",
        })
        .collect();
    assert_eq!(kinds.first(), Some(&"hello"));
    assert_eq!(kinds.last(), Some(&"done"));
    assert!(log_text.contains("\"kind\":\"query\"") && log_text.contains("\"kind\":\"prefer\""));

    let out = goci(&["induce", "-e", path(&facts), "--replay", path(&log), "-o", path(&second)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (a, b) = (std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn bad_paths_fail_cleanly() {
    let out = goci(&["induce", "-e", "/definitely/not/here.facts"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = goci(&["eval", "--theory", path(&data("lshape_truth.thy")), "--pos", "/nope.facts"]);
    assert!(!out.status.success());
}

#[test]
fn pac_prints_json() {
    let out = goci(&["pac", "--t", "2", "--p", "2", "--m", "2", "--i", "1", "--j", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let size = v["h0"]["value"].as_f64().unwrap();
    assert!((size - 64.0).abs() < 1e-9 * 64.0, "{v}");
}

#[test]
fn eval_and_plan_on_bundled_files() {
    let (facts, truth) = (data("lshape.facts"), data("lshape_truth.thy"));
    let out = goci(&["eval", "--theory", path(&truth), "--pos", path(&facts)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("precision=1"));
    let out = goci(&["plan", "--example", path(&facts)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).lines().any(|l| l.starts_with("place(")));
}

#[test]
fn one_concept_one_seed_benchmark() {
    let out = goci(&["benchmark", "--seeds", "1", "--concepts", "L", "--runs"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let summary_rows = stdout.lines().filter(|l| l.split_whitespace().nth(1) == Some("1")).count();
    assert!(summary_rows >= 4, "{stdout}");
    for arm in ["GOCI", "ILP", "ILP+Score", "ILP+Guidance"] {
        assert!(stdout.lines().any(|l| l.starts_with(arm)), "{arm} missing:\n{stdout}");
    }
}
