use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn quadconic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadconic"))
        .args(args)
        .env_remove("QUADCONIC_EPSILON")
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&o.stderr));
    })
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn construct_square_puts_two_diagonal_points_at_infinity() {
    let o = quadconic(&["construct", path(&data("square.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    for m in ["M1", "M2"] {
        assert_eq!(v["points"][m][2], "0", "{m}: {}", v["points"][m]);
    }
    assert_eq!(v["points"]["M3"], json!(["0", "0", "1"]));
}

#[test]
fn construct_is_byte_identical_across_runs() {
    let a = quadconic(&["construct", path(&data("reference.json"))]);
    let b = quadconic(&["construct", path(&data("reference.json"))]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn off_conic_vertex_exits_2() {
    let o = quadconic(&["construct", path(&data("off_conic.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("VertexNotOnConic"));
}

#[test]
fn missing_file_and_bad_epsilon_exit_2() {
    assert_eq!(quadconic(&["construct", "/nonexistent.json"]).status.code(), Some(2));
    let o = quadconic(&["--epsilon", "-1", "construct", path(&data("square.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_lemma_2_1_exact_batch() {
    let o = quadconic(&["verify", "--claims", "lemma-2.1", "--trials", "50", "--backend", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    let trials = v["trials"].as_array().unwrap();
    assert_eq!(trials.len(), 50);
    for t in trials {
        for r in t["reports"].as_array().unwrap() {
            assert_eq!(r["status"], "holds");
            assert_eq!(r["residual"], "0");
        }
    }
}

#[test]
fn verify_all_float_at_1e_8() {
    let o = quadconic(&[
        "--epsilon", "1e-8", "verify", "--claims", "all", "--trials", "200", "--backend", "float",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["summary"]["counted_failures"], json!([]));
    assert!(v["summary"]["max_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn epsilon_from_environment_and_flag() {
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_quadconic"))
            .args(args)
            .env("QUADCONIC_EPSILON", "1e-30")
            .output()
            .unwrap()
    };
    // below rounding level no float vertex passes the on-conic check
    let o = run(&["verify", "--claims", "thm-4.1", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("SamplerExhausted"));
    let o = run(&["--epsilon", "1e-8", "verify", "--claims", "thm-4.1", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn orthocenter_claim_is_skipped_on_ellipses() {
    let o = quadconic(&["verify", "--claims", "thm-2.1", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["summary"]["skipped"], 10);
    for t in v["trials"].as_array().unwrap() {
        assert_eq!(t["reports"][0]["cause"], "NotACircle");
    }
}

#[test]
fn poncelet_pencil_closes_around_the_origin() {
    let o = quadconic(&["poncelet", "--lambda", "1/2", "--mu", "0", "--starts", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["closed"], 100);
    assert_eq!(v["diagonal_at_origin"], 100);
}

#[test]
fn poncelet_degenerate_pencil_exits_2() {
    let o = quadconic(&["poncelet", "--lambda", "1/2", "--mu", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn poncelet_r_conic_is_8_connected() {
    let o = quadconic(&[
        "--epsilon", "1e-8", "poncelet", "--scene", path(&data("reference.json")),
        "--outer", "F", "--inner", "C", "--k", "8", "--starts", "40",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["connectivity"]["connected"], true);
}

#[test]
fn sequence_of_five_conics() {
    let o = quadconic(&["--epsilon", "1e-8", "sequence", path(&data("reference.json")), "--depth", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["conics"].as_array().unwrap().len(), 5);
    let links = v["connectivity"].as_array().unwrap();
    assert_eq!(links.len(), 4);
    assert!(links.iter().all(|l| l["report"]["connected"] == true));
}

#[test]
fn pentagram_reports_are_evidence() {
    let dir = std::env::temp_dir().join(format!("quadconic-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let svg = dir.join("trial.svg");
    let o = quadconic(&["pentagram", "--trials", "10", "--seed", "5", "--trial", "2", "--svg", path(&svg)]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["summary"]["status"], "evidence");
    assert_eq!(v["trials"].as_array().unwrap().len(), 10);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<?xml"));
}

#[test]
fn render_lemma_2_1_scene() {
    let o = quadconic(&["render", path(&data("lemma21.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let svg = String::from_utf8(o.stdout).unwrap();
    for a in ["A1", "A2", "A3", "A4"] {
        assert!(svg.contains(&format!("class=\"vertex\" data-name=\"{a}\"")));
    }
    for n in ["M1", "M3", "N2", "P2"] {
        assert!(svg.contains(&format!("data-name=\"{n}\"")), "{n}");
    }
    assert!(svg.contains("<path class=\"conic\" data-name=\"C\""));
    assert!(svg.contains("<line class=\"highlight\" data-name=\"M3M1\""));
    let again = quadconic(&["render", path(&data("lemma21.json"))]);
    assert_eq!(svg.as_bytes(), &again.stdout[..]);
}

#[test]
fn verify_scene_claims() {
    let o = quadconic(&["verify", path(&data("lemma21.json")), "--claims", "lemma-2.1/m2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["trials"][0]["reports"][0]["residual"], "0");
}

#[test]
fn serve_round_trip_over_stdio() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_quadconic"))
        .arg("serve")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let mut stdout = BufReader::new(child.stdout.take().unwrap());
    let scene: Value = serde_json::from_str(&std::fs::read_to_string(data("reference.json")).unwrap()).unwrap();
    let mut ask = |req: Value| -> Value {
        writeln!(stdin, "{req}").unwrap();
        stdin.flush().unwrap();
        let mut line = String::new();
        stdout.read_line(&mut line).unwrap();
        serde_json::from_str(&line).unwrap()
    };
    let r = ask(json!({"id": "o", "op": "open", "session": "s", "payload": {"scene": scene}}));
    assert_eq!(r["ok"], true);
    let before = r["result"]["config"]["points"]["M1"].clone();
    let r = ask(json!({"id": "d", "op": "drag", "session": "s", "payload": {"vertex": "A2", "t": "1/3"}}));
    assert_eq!(r["id"], "d");
    assert_eq!(r["ok"], true, "{r}");
    assert_ne!(r["result"]["config"]["points"]["M1"], before);
    let r = ask(json!({"id": 3, "op": "claims", "session": "s", "payload": {"ids": ["thm-4.1/bullet-1"]}}));
    assert_eq!(r["result"][0]["status"], "holds");
    drop(stdin);
    assert!(child.wait().unwrap().success());
}

#[test]
fn errata_check_matches_shipped_table() {
    let o = quadconic(&["errata", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!(v.to_string().contains("resolved-by-pattern"));
}
