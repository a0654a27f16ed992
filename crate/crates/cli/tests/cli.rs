use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scpv_core::encoding;
use scpv_core::eval;
use scpv_core::lang;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn scpv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scpv")).args(args).env("SCPV_TRACE_LEVEL", "events").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn synapse() -> String {
    corpus("synapse.l").display().to_string()
}

#[test]
fn run_prints_values_and_exit_codes() {
    let o = scpv(&["run", &synapse(), "Main", "(rm wh2) ()"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "True");
    let o = scpv(&["run", &synapse(), "Main", "(rm rm) ()"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).trim(), "Undefined");
    let o = scpv(&["run", &synapse(), "Append", "(I I), ()"]);
    assert_eq!(o.status.code(), Some(1), "Append takes one argument");
    assert_eq!(scpv(&["run", &synapse(), "Nope", ""]).status.code(), Some(1));
    assert_eq!(scpv(&["run", "/nonexistent.l", "Main", ""]).status.code(), Some(1));
}

#[test]
fn verify_exit_codes() {
    let o = scpv(&["verify", &synapse(), "--mode", "direct", "--samples", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("verdict: safe after 1 pass(es)"), "{out}");
    assert!(out.contains("agrees with the model on 50/50"), "{out}");

    let mutant = corpus("synapse_unsafe_mutant.l").display().to_string();
    let o = scpv(&["verify", &mutant, "--mode", "direct"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("unsafe symbol in"));

    let o = scpv(&["verify", &synapse(), "--mode", "indirect", "--passes", "2", "--max-nodes", "10"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn encode_prints_decodable_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("enc.l");
    let o = scpv(&["encode", &synapse(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let d = eval::parse_data(std::fs::read_to_string(&out).unwrap().trim()).unwrap();
    let p = lang::parse_program(&std::fs::read_to_string(corpus("synapse.l")).unwrap()).unwrap();
    assert_eq!(encoding::decode_defs(&d).unwrap(), p);
}

#[test]
fn ground_entries_supercompile_to_constants() {
    let o = scpv(&["supercompile", &synapse(), "--entry", "Main((rm wh2) : ())"]);
    assert_eq!(o.status.code(), Some(0));
    let p = lang::parse_program(&stdout(&o)).unwrap();
    assert_eq!(p.defs.len(), 1);
    let main = p.get("Main").unwrap();
    assert_eq!(main.rules.len(), 1);
    assert_eq!(lang::print_expr(&main.rules[0].rhs), "True");
}

#[test]
fn supercompile_through_the_interpreter() {
    let o = scpv(&["supercompile", &synapse(), "--interpret-as", "Synapse", "--entry", "Int((Call Main e.d), (Prog Synapse))"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let p = lang::parse_program(&stdout(&o)).unwrap();
    assert!(p.get("Int").is_some());
}

#[test]
fn identical_invocations_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let res = dir.path().join(format!("res{i}.l"));
        let trace = dir.path().join(format!("trace{i}.jsonl"));
        let o = scpv(&[
            "verify",
            &synapse(),
            "--mode",
            "indirect",
            "--passes",
            "2",
            "--residual-out",
            res.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push((std::fs::read(res).unwrap(), std::fs::read(trace).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let trace = String::from_utf8(outputs[0].1.clone()).unwrap();
    let events: Vec<serde_json::Value> = trace.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(events.iter().filter(|e| e["ev"] == "Pass").count(), 2);
    assert!(events.iter().any(|e| e["ev"] == "Generalize"));
    assert!(events.iter().all(|e| e["v"] == 1));
}

#[test]
fn generate_matches_the_library() {
    let spec = corpus("protocols/synapse.spec");
    for flag in [None, Some("--identity-events")] {
        let mut args = vec!["generate", spec.to_str().unwrap()];
        args.extend(flag);
        let o = scpv(&args);
        assert_eq!(o.status.code(), Some(0));
        let opts = scpv_core::corpus::GenOptions { identity_events: flag.is_some() };
        let want = scpv_core::corpus::generate_model_source(&scpv_core::corpus::synapse_spec(), opts).unwrap();
        assert_eq!(stdout(&o), want);
    }
    assert_eq!(scpv(&["generate", synapse().as_str()]).status.code(), Some(1));
}
