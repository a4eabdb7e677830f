//! Sensor traces: CSV ingestion and export, the synthetic generator, and
//! golden fixtures.
//!
//! # Trace CSV
//!
//! ```text
//! timestamp_s,channel,value
//! 0,temperature,20.0312
//! 1,temperature,19.9871
//! ```
//!
//! The header row is mandatory. `channel` is one of `temperature`,
//! `humidity` or `nitrate`; timestamps must strictly increase within each
//! channel. Values are written with six significant digits.

mod csv_io;
pub mod fixtures;
mod synth;
mod types;

pub use csv_io::{format_significant, parse, parse_path, serialize, write_path, TraceSet};
pub use synth::{generate, AnomalySpec, ChannelBaseline, SynthSpec};
pub use types::{Channel, SensorSample, SensorTrace};
