//! Exact Lefschetz-module toolkit.
//!
//! Everything is computed over the rationals with exact arithmetic. The
//! crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod global;
pub mod graded;
pub mod lefschetz;
pub mod linalg;
pub mod local;
pub mod models;
pub mod pairing;
pub mod poly;
pub mod splitting;

pub use error::{Error, Result};
pub use graded::{GradedMap, GradedSpace, Subspaces};
pub use lefschetz::LefschetzModule;
pub use linalg::{Matrix, Rational};
pub use pairing::GradedPairing;
