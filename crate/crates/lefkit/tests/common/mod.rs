//! Invocations over the shipped fixtures, and how to run the binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture_dir() -> PathBuf {
    manifest_dir().join("fixtures")
}

pub fn snapshot_dir() -> PathBuf {
    manifest_dir().join("tests").join("snapshots")
}

pub fn fixture_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            if p.extension()? != "json" {
                return None;
            }
            Some(p.file_stem()?.to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

/// A snapshot name and the arguments after `lefkit`.
pub struct Invocation {
    pub name: String,
    pub args: Vec<String>,
}

fn inv(args: &[&str]) -> Invocation {
    let name = args
        .iter()
        .map(|a| a.trim_start_matches('-').replace([',', '/', '.'], "_"))
        .collect::<Vec<_>>()
        .join("__");
    Invocation { name, args: args.iter().map(|s| s.to_string()).collect() }
}

/// Every snapshotted invocation. Fixture files are named without a
/// directory and resolved through the fixture directory.
pub fn invocations() -> Vec<Invocation> {
    let mut out: Vec<Invocation> = fixture_names().iter().map(|f| inv(&["validate", f])).collect();
    for f in ["p1", "p2", "p3", "broken", "toy_flat"] {
        for op in ["check", "primitive", "lambda"] {
            out.push(inv(&["lefschetz", op, f]));
        }
    }
    for f in ["seq_chain3", "seq_p1"] {
        for op in ["two-step", "lambda"] {
            out.push(inv(&["split", op, f]));
        }
    }
    for f in ["random_filtered", "random_filtered_flipped", "toy_filtered", "seq_chain3"] {
        out.push(inv(&["split", "three-step", f]));
    }
    for f in ["p2", "p3", "random_filtered", "random_filtered_flipped", "toy_filtered"] {
        for op in ["adjoint", "blockform", "hodge", "twist"] {
            out.push(inv(&["pairing", op, f]));
        }
    }
    for f in ["cyc2", "chain3", "smooth", "bgs", "bgs1"] {
        for op in ["vanishing", "harmonic", "report"] {
            out.push(inv(&["local", op, f]));
        }
    }
    out.extend([
        inv(&["local", "height", "cyc2", "--z", "comp1", "--w", "comp2"]),
        inv(&["local", "height", "cyc2", "--z", "comp1", "--w", "comp1"]),
        inv(&["local", "height", "chain3", "--z", "comp1", "--w", "comp3"]),
        inv(&["local", "height", "cyc2", "--z", "vert1", "--w", "comp1"]),
        inv(&["local", "lift", "cyc2", "--cycle", "comp1"]),
        inv(&["local", "lift", "chain3", "--cycle", "0,1,0,0,0,0"]),
        inv(&["local", "bblift", "cyc2", "--cycle", "1,-1,0,0"]),
        inv(&["local", "bblift", "cyc2", "--cycle", "comp1"]),
        inv(&["local", "lift", "bgs", "--cycle", "comp1"]),
        inv(&["local", "height", "cyc2", "--z", "nowhere", "--w", "comp1"]),
    ]);
    for f in ["toy", "toy_twist", "toy_flipped", "toy_flat", "random_arakelov"] {
        for op in ["decompose", "equiv", "divisors", "zerocycles"] {
            out.push(inv(&["global", op, f]));
        }
    }
    out.extend([
        inv(&["global", "llift", "toy", "--cycle", "xi_1"]),
        inv(&["global", "llift", "toy", "--cycle", "X_K", "--degree", "0"]),
        inv(&["global", "lpair", "toy", "--z", "xi_1", "--w", "xi_1"]),
        inv(&["global", "lpair", "toy", "--z", "c1_LK", "--w", "xi_1"]),
        inv(&["global", "lpair", "toy_twist", "--z", "1,1", "--w", "0,1"]),
        inv(&["global", "decompose", "p2"]),
    ]);
    out.extend([
        inv(&["gen", "pn", "--n", "2"]),
        inv(&["gen", "graph", "--name", "chain3"]),
        inv(&["gen", "graph", "--matrix", "-3,3;3,-3", "--degrees", "1,2"]),
        inv(&["gen", "strata", "--points", "1"]),
        inv(&["gen", "toy", "--lsq", "-14"]),
        inv(&["gen", "toy", "--fiber", "cycle2"]),
        inv(&["gen", "random", "--kind", "lefschetz", "--seed", "7"]),
        inv(&["gen", "random", "--kind", "broken", "--seed", "7"]),
        inv(&["gen", "random", "--kind", "filtered", "--seed", "7", "--flip-g0"]),
        inv(&["gen", "random", "--kind", "arakelov", "--seed", "7", "--needs-twist"]),
    ]);
    out
}

/// Runs the built binary; returns stdout and the exit code.
pub fn run_binary(args: &[String], fixtures: Option<&Path>) -> (String, i32) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lefkit"));
    cmd.args(args);
    match fixtures {
        Some(dir) => cmd.env("LEFKIT_FIXTURES", dir),
        None => cmd.env_remove("LEFKIT_FIXTURES"),
    };
    let out = cmd.output().expect("lefkit binary runs");
    (String::from_utf8(out.stdout).expect("utf-8 output"), out.status.code().unwrap_or(-1))
}

pub fn snapshot_path(name: &str) -> PathBuf {
    snapshot_dir().join(format!("{name}.txt"))
}

/// Snapshot text: the exit code on the first line, then stdout verbatim.
pub fn snapshot_text(stdout: &str, code: i32) -> String {
    format!("exit {code}\n{stdout}")
}
