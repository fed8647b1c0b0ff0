//! The files in `fixtures/` are exactly what the generators produce, and
//! each one decodes back to the same document.
//!
//! Set `LEFKIT_BLESS=1` to rewrite them.

use std::path::Path;

use lefkit::document;
use lefkit::fixtures::{render, shipped, write_all};

fn dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[test]
fn shipped_fixtures_are_current() {
    if std::env::var_os("LEFKIT_BLESS").is_some() {
        write_all(&dir()).unwrap();
    }
    for (name, doc) in shipped().unwrap() {
        let path = dir().join(format!("{name}.json"));
        let on_disk = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(on_disk, render(&document::encode(&doc)), "{name}.json is stale");
    }
}

#[test]
fn fixtures_round_trip() {
    for (name, doc) in shipped().unwrap() {
        let text = render(&document::encode(&doc));
        let back = document::parse(&text).unwrap_or_else(|e| panic!("{name}: {:?}", e.diagnostics));
        assert_eq!(back, doc, "{name}");
    }
}
