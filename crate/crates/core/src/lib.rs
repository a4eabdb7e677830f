//! Energy models, in-sensor analytics, cluster protocol and a discrete-event
//! simulator for battery-powered sensor meshes with BLE clustering and LoRa
//! uplinks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod energy;
pub mod error;
pub mod figures;
pub mod isa;
pub mod protocol;
pub mod sim;
pub mod trace;
pub mod units;

pub use error::{Error, Result};
pub use trace::{Channel, SensorSample, SensorTrace};
