//! JSON documents and the `lefkit` command line.
//!
//! [`run`] takes an argument list and returns a [`CommandResult`]; the
//! binary only prints it and exits with its code.

pub mod codec;
pub mod commands;
pub mod document;
pub mod fixtures;
pub mod result;

pub use commands::{resolve, run};
pub use result::{CliError, CommandResult, Status};

/// `LEFKIT_FIXTURES` if set, else the fixtures shipped with this crate.
pub fn fixture_dir() -> std::path::PathBuf {
    match std::env::var_os("LEFKIT_FIXTURES") {
        Some(d) => d.into(),
        None => std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"),
    }
}
