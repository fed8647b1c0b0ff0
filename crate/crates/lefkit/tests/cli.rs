//! The command line: snapshots over the shipped fixtures, agreement with
//! direct library calls, error statuses and exit codes.
//!
//! Set `LEFKIT_BLESS=1` to rewrite `tests/snapshots/`.

mod common;

use std::path::{Path, PathBuf};

use common::{fixture_dir, invocations, run_binary, snapshot_dir, snapshot_path, snapshot_text};
use lefkit::document::{self, Document};
use lefkit::{codec, run, CommandResult, Status};
use lefkit_core::global::decompose;
use lefkit_core::lefschetz::lambda_operator;
use lefkit_core::local::local_height;
use lefkit_core::splitting::three_step_split;
use serde_json::{json, Value};

fn lefkit(args: &[&str]) -> CommandResult {
    let dir = fixture_dir();
    run(std::iter::once("lefkit").chain(args.iter().copied()), Some(&dir))
}

fn payload(args: &[&str]) -> Value {
    let r = lefkit(args);
    assert_eq!(r.status, Status::Ok, "{args:?}: {:?}", r.diagnostics);
    r.payload.unwrap()
}

fn load(name: &str) -> Document {
    let text = std::fs::read_to_string(fixture_dir().join(format!("{name}.json"))).unwrap();
    document::parse(&text).unwrap()
}

/// A scratch directory for one test, under the build directory.
fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn snapshots_match() {
    let bless = std::env::var_os("LEFKIT_BLESS").is_some();
    if bless {
        std::fs::create_dir_all(snapshot_dir()).unwrap();
    }
    let mut stale = Vec::new();
    for inv in invocations() {
        let (stdout, code) = run_binary(&inv.args, None);
        let text = snapshot_text(&stdout, code);
        let path = snapshot_path(&inv.name);
        if bless {
            std::fs::write(&path, &text).unwrap();
            continue;
        }
        match std::fs::read_to_string(&path) {
            Ok(expected) if expected == text => {}
            _ => stale.push(inv.name),
        }
    }
    assert!(stale.is_empty(), "stale or missing snapshots: {stale:?}");
}

#[test]
fn every_snapshot_has_an_invocation() {
    let names: Vec<String> = invocations().into_iter().map(|i| i.name).collect();
    for entry in std::fs::read_dir(snapshot_dir()).unwrap() {
        let p = entry.unwrap().path();
        let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
        assert!(names.contains(&stem), "orphaned snapshot {}", p.display());
    }
}

#[test]
fn documented_examples() {
    let v = payload(&["local", "height", "fixtures/cyc2.json", "--z", "comp1", "--w", "comp2"]);
    assert_eq!(v, json!({ "value": "-1/8" }));

    let v = payload(&["global", "decompose", "fixtures/toy.json"]);
    assert_eq!(v["h_L"], "3/2");
    assert_eq!(v["beta_XK"], "3/2·X_eps");
    assert_eq!(v["c1_L0"], "L - 3/2·X_eps");
    assert_eq!(v["c1_L0_top"], "0");

    let r = lefkit(&["validate", "fixtures/empty.json"]);
    assert_eq!(r.status, Status::Ok);
    assert!(r.diagnostics.is_empty());
}

#[test]
fn commands_agree_with_the_library() {
    let Document::Fiber(f) = load("cyc2") else { panic!("cyc2 is a fiber") };
    let m = f.model.as_ref().unwrap();
    for (z, w) in [("comp1", "comp2"), ("comp2", "comp2"), ("vert1", "comp2")] {
        let direct = local_height(m, 1, &f.cycles[z].coords, &f.cycles[w].coords).unwrap();
        assert_eq!(payload(&["local", "height", "cyc2", "--z", z, "--w", w])["value"], codec::rational(&direct));
    }

    let Document::Lefschetz { module, .. } = load("p3") else { panic!("p3 is a module") };
    let lam = lambda_operator(&module).unwrap();
    assert_eq!(payload(&["lefschetz", "lambda", "p3"])["lambda"], codec::graded_map(&lam));

    let Document::Filtered { filtered, .. } = load("random_filtered") else { panic!("filtered document") };
    let s = three_step_split(&filtered).unwrap();
    let v = payload(&["split", "three-step", "random_filtered"]);
    for (key, map) in [("alpha0", &s.alpha0), ("alpha1", &s.alpha1), ("alpha2", &s.alpha2), ("beta", &s.beta)] {
        assert_eq!(v[key], codec::graded_map(map), "{key}");
    }

    let Document::Arakelov(d) = load("random_arakelov") else { panic!("Arakelov document") };
    let g = decompose(&d).unwrap();
    let v = payload(&["global", "decompose", "random_arakelov"]);
    assert_eq!(v["h_L"], codec::rational(&g.h_l));
    assert_eq!(v["beta_XK_coords"], codec::vector(&g.beta_xk));
    assert_eq!(v["L0"], codec::graded_map(&g.l0));
}

#[test]
fn in_process_output_matches_the_binary() {
    for args in [
        vec!["global", "decompose", "toy"],
        vec!["lefschetz", "check", "broken"],
        vec!["validate", "nowhere"],
    ] {
        let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let (stdout, code) = run_binary(&owned, None);
        let r = lefkit(&args);
        assert_eq!(stdout, r.render());
        assert_eq!(code, r.exit_code());
    }
}

#[test]
fn exit_codes() {
    let cases: [(&[&str], i32, &str); 5] = [
        (&["validate", "p2"], 0, "ok"),
        (&["lefschetz", "lambda", "broken"], 2, "hypothesis_violation"),
        (&["local", "bblift", "cyc2", "--cycle", "comp1"], 2, "hypothesis_violation"),
        (&["global", "decompose", "p2"], 3, "contract_error"),
        (&["lefschetz", "frobnicate", "p2"], 3, "contract_error"),
    ];
    for (args, code, status) in cases {
        let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let (stdout, got) = run_binary(&owned, None);
        assert_eq!(got, code, "{args:?}");
        let v: Value = serde_json::from_str(&stdout).unwrap();
        assert_eq!(v["status"], status, "{args:?}");
        if code != 0 {
            assert!(v.get("payload").is_none());
            assert!(!v["diagnostics"].as_array().unwrap().is_empty());
        }
    }
}

fn parse_error(text: &str) -> Vec<String> {
    let e = document::parse(text).unwrap_err();
    assert_eq!(e.status, Status::ContractError);
    e.diagnostics
}

#[test]
fn malformed_documents_are_contract_errors() {
    let d = parse_error("{\n  \"lefkit_schema\": 1,\n  \"kind\": \"lefschetz\",,\n}");
    assert!(d[0].contains("line 3"), "{d:?}");

    let d = parse_error(r#"{"kind": "lefschetz", "n": 0, "dims": {}, "L": {}}"#);
    assert!(d[0].contains("lefkit_schema"), "{d:?}");

    let d = parse_error(r#"{"lefkit_schema": 2, "kind": "lefschetz"}"#);
    assert!(d[0].contains("unsupported version 2"), "{d:?}");

    let d = parse_error(r#"{"lefkit_schema": 1, "kind": "motive"}"#);
    assert!(d[0].contains("unknown kind"), "{d:?}");

    let d = parse_error(r#"{"lefkit_schema": 1, "kind": "lefschetz", "n": 2, "dims": {"0": 1, "1": 1}, "L": {"0": [["x"]]}}"#);
    assert!(d.iter().any(|s| s.contains("$.L")), "{d:?}");

    // Bad input never reaches the library as a panic.
    let dir = scratch("malformed");
    let path = dir.join("bad.json");
    std::fs::write(&path, "[1, 2").unwrap();
    let r = lefkit(&["validate", path.to_str().unwrap()]);
    assert_eq!(r.status, Status::ContractError);
    assert!(r.diagnostics[0].contains("malformed JSON at line 1"), "{:?}", r.diagnostics);
}

#[test]
fn hypothesis_violations_from_documents() {
    // A module that parses but is not hard Lefschetz.
    let text = r#"{"lefkit_schema": 1, "kind": "lefschetz", "n": 2, "dims": {"0": 1, "1": 1, "2": 1}, "L": {"0": [["1"]], "1": [["0"]]}}"#;
    let dir = scratch("hypothesis");
    std::fs::write(dir.join("flat.json"), text).unwrap();
    let r = run(["lefkit", "lefschetz", "primitive", "flat"], Some(&dir));
    assert_eq!(r.status, Status::HypothesisViolation, "{:?}", r.diagnostics);
    let v = payload(&["lefschetz", "check", "broken"]);
    assert_eq!(v["holds"], false);
}

#[test]
fn fixture_directory_can_be_overridden() {
    let dir = scratch("override");
    let (stdout, code) = run_binary(&["gen".into(), "graph".into(), "--name".into(), "chain3".into()], None);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    std::fs::write(dir.join("mine.json"), lefkit::fixtures::render(&v["payload"])).unwrap();

    let args: Vec<String> = ["local", "report", "mine"].iter().map(|s| s.to_string()).collect();
    let (with, code) = run_binary(&args, Some(&dir));
    assert_eq!(code, 0, "{with}");
    let (without, code) = run_binary(&args, None);
    assert_eq!(code, 3, "{without}");

    // The shipped fixtures are not visible through the override.
    let (_, code) = run_binary(&["validate".into(), "toy".into()], Some(&dir));
    assert_eq!(code, 3);
}

#[test]
fn generated_files_round_trip() {
    let dir = scratch("gen_out");
    for (name, args) in [
        ("p3", vec!["gen", "pn", "--n", "3"]),
        ("toy", vec!["gen", "toy"]),
        ("filtered", vec!["gen", "random", "--seed", "11"]),
        ("arakelov", vec!["gen", "random", "--kind", "arakelov", "--seed", "11"]),
    ] {
        let path = dir.join(format!("{name}.json"));
        let _ = std::fs::remove_file(&path);
        let printed = payload(&args);
        let mut with_out = args.clone();
        with_out.extend(["--out", path.to_str().unwrap()]);
        let v = payload(&with_out);
        assert_eq!(v["kind"], printed["kind"]);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), printed);
        let doc = document::parse(&text).unwrap();
        assert_eq!(document::encode(&doc), printed);
        assert_eq!(lefkit(&["validate", path.to_str().unwrap()]).status, Status::Ok);
    }
    // The shipped toy is what `gen toy --fiber cycle2` writes.
    assert_eq!(payload(&["gen", "toy", "--fiber", "cycle2"]), document::encode(&load("toy")));
}

#[test]
fn shipped_fixtures_all_validate() {
    for name in common::fixture_names() {
        assert_eq!(lefkit(&["validate", &name]).status, Status::Ok, "{name}");
    }
}
