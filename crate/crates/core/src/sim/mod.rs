//! Discrete-event simulation of a sensor mesh: per-node batteries, ISA
//! sensing, BLE clustering with head rotation and LoRa uplinks.

pub mod config;
pub mod crosscheck;
pub mod engine;
pub mod ladder;
pub mod ledger;
pub mod profile;
pub mod result;
pub mod retention;
pub mod route;
pub mod source;

pub use config::{BaselineModel, LoraCost, Mode, ScenarioConfig, StopRule, TraceExtend, Workload};
pub use crosscheck::{check_stationary, cycle_energies, lifetime_crosscheck, Crosscheck};
pub use engine::{run, run_scenario};
pub use ladder::{ladder_configs, leakage_bound_s, run_ladder, rung_config, RungResult, RUNGS};
pub use ledger::{Category, EnergyLedger};
pub use profile::{Draw, EnergyProfile, AC_PER_COULOMB};
pub use result::{HandoverRecord, HeadSpan, LogEntry, LogKind, NodeOutcome, SimResult};
pub use retention::{info_retention, node_retention};
pub use route::route_multihop;
pub use source::{source_for, RecordedSource, SyntheticSource, TraceSource};
