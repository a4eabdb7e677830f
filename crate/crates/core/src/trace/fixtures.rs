//! Golden fixtures.
//!
//! ```text
//! fixtures/
//!   golden_trace.csv       100-sample temperature reference trace
//!   broadcast_golden.hex   encoded broadcast packets, one per line
//! ```
//!
//! The directory defaults to the crate's `fixtures/` folder and can be
//! overridden with the `ISA_MESH_FIXTURES` environment variable.

use std::path::PathBuf;

use super::csv_io::parse_path;
use super::types::{Channel, SensorTrace};
use crate::error::{Error, Result};

pub const FIXTURES_ENV: &str = "ISA_MESH_FIXTURES";
pub const GOLDEN_TRACE: &str = "golden_trace.csv";
pub const BROADCAST_GOLDEN: &str = "broadcast_golden.hex";

pub fn fixtures_dir() -> PathBuf {
    match std::env::var_os(FIXTURES_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"),
    }
}

pub fn fixture_path(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

/// Loads the committed compression reference trace.
pub fn golden_trace() -> Result<SensorTrace> {
    let set = parse_path(fixture_path(GOLDEN_TRACE))?;
    set.get(Channel::Temperature)
        .cloned()
        .ok_or_else(|| Error::Config(format!("{GOLDEN_TRACE} has no temperature channel")))
}
