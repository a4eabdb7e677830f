//! Simulation output and its CSV forms.
//!
//! # events.csv (schema `isa-mesh-events/1`)
//!
//! ```text
//! # isa-mesh-events/1
//! time_s,node,kind,coulombs
//! 900.04,0,ble_broadcast,9.72e-5
//! ```
//!
//! One row per logged event in simulation order. `coulombs` is the charge
//! drawn by that event (0 for markers such as `death`).
//!
//! # summary.csv (schema `isa-mesh-summary/1`)
//!
//! ```text
//! # isa-mesh-summary/1
//! node,role,lifetime_s,final_charge_c,lora_tx_c,lora_rx_c,ble_c,compute_c,leakage_c,uplinks
//! ```
//!
//! `lifetime_s` is empty for nodes alive at the end of the run.

use std::fmt;
use std::io::Write;
use std::path::Path;

use super::config::Mode;
use super::ledger::{Category, EnergyLedger};
use super::profile::to_coulombs;
use crate::error::{Error, Result};

pub const EVENTS_SCHEMA: &str = "isa-mesh-events/1";
pub const SUMMARY_SCHEMA: &str = "isa-mesh-summary/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogKind {
    /// LoRa transmit plus setup overhead.
    LoraTx,
    /// LoRa receive window after a transmit.
    LoraRxWindow,
    /// A relay receiving a frame.
    RelayRx,
    BleBroadcast,
    HandoverAnnounce,
    HandoverAck,
    Compute,
    Leakage,
    Death,
    DeliveryFailed,
    HeadChange,
}

impl LogKind {
    pub fn name(self) -> &'static str {
        match self {
            LogKind::LoraTx => "lora_tx",
            LogKind::LoraRxWindow => "lora_rx_window",
            LogKind::RelayRx => "relay_rx",
            LogKind::BleBroadcast => "ble_broadcast",
            LogKind::HandoverAnnounce => "handover_announce",
            LogKind::HandoverAck => "handover_ack",
            LogKind::Compute => "compute",
            LogKind::Leakage => "leakage",
            LogKind::Death => "death",
            LogKind::DeliveryFailed => "delivery_failed",
            LogKind::HeadChange => "head_change",
        }
    }

    /// The ledger category an event of this kind is charged to.
    pub fn category(self) -> Option<Category> {
        match self {
            LogKind::LoraTx => Some(Category::LoraTx),
            LogKind::LoraRxWindow | LogKind::RelayRx => Some(Category::LoraRx),
            LogKind::BleBroadcast | LogKind::HandoverAnnounce | LogKind::HandoverAck => {
                Some(Category::Ble)
            }
            LogKind::Compute => Some(Category::Compute),
            LogKind::Leakage => Some(Category::Leakage),
            LogKind::Death | LogKind::DeliveryFailed | LogKind::HeadChange => None,
        }
    }
}

impl fmt::Display for LogKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogEntry {
    pub time_us: u64,
    pub node: u32,
    pub kind: LogKind,
    /// Attocoulombs drawn.
    pub charge_ac: i128,
}

impl LogEntry {
    pub fn time_s(&self) -> f64 {
        self.time_us as f64 * 1e-6
    }

    pub fn coulombs(&self) -> f64 {
        to_coulombs(self.charge_ac)
    }
}

/// A head rotation decision and the charges it was based on.
#[derive(Debug, Clone, PartialEq)]
pub struct HandoverRecord {
    pub time_us: u64,
    pub from: u32,
    pub to: u32,
    /// `(node, coulombs)` for every member considered.
    pub reports: Vec<(u32, f64)>,
}

/// Which node held the head role of a cluster from `time_us` on.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadSpan {
    pub time_us: u64,
    pub members: Vec<u32>,
    pub head: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeOutcome {
    pub id: u32,
    pub relay: bool,
    pub position: (f64, f64),
    pub death_us: Option<u64>,
    pub initial_ac: i128,
    pub final_ac: i128,
    pub ledger: EnergyLedger,
    /// Ticks sensed while alive.
    pub sensed_ticks: u64,
    /// Raw samples that reached the hub (baseline modes).
    pub delivered_samples: u64,
    pub uplinks: u64,
}

impl NodeOutcome {
    pub fn lifetime_s(&self) -> Option<f64> {
        self.death_us.map(|t| t as f64 * 1e-6)
    }

    pub fn final_charge(&self) -> f64 {
        to_coulombs(self.final_ac)
    }

    /// `initial - final - ledger total`, in attocoulombs; zero when every
    /// draw was booked.
    pub fn conservation_error_ac(&self) -> i128 {
        self.initial_ac - self.final_ac - self.ledger.total_attocoulombs()
    }
}

/// Hub-side record of delivered data, per sensing node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HubStore {
    /// `[node][channel]` delivered `(tick, value)` pairs in tick order.
    pub samples: Vec<[Vec<(u64, f64)>; 3]>,
    /// Last tick whose data reached the hub, per node.
    pub covered_until: Vec<Option<u64>>,
}

impl HubStore {
    pub fn new(nodes: usize) -> Self {
        Self {
            samples: vec![Default::default(); nodes],
            covered_until: vec![None; nodes],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub mode: Mode,
    pub seed: u64,
    pub sample_period_us: u64,
    pub end_us: u64,
    pub nodes: Vec<NodeOutcome>,
    pub events: Vec<LogEntry>,
    pub handovers: Vec<HandoverRecord>,
    pub head_spans: Vec<HeadSpan>,
    pub hub: HubStore,
    pub frames_delivered: u64,
    pub delivery_failures: u64,
    /// Payload bits carried by delivered frames.
    pub bits_delivered: u64,
    pub supply_voltage: f64,
}

impl SimResult {
    pub fn sensing(&self) -> impl Iterator<Item = &NodeOutcome> {
        self.nodes.iter().filter(|n| !n.relay)
    }

    /// Earliest death among sensing nodes, seconds.
    pub fn first_death_s(&self) -> Option<f64> {
        self.sensing()
            .filter_map(NodeOutcome::lifetime_s)
            .reduce(f64::min)
    }

    /// Latest death among sensing nodes when all of them died, seconds.
    pub fn last_death_s(&self) -> Option<f64> {
        self.sensing()
            .map(NodeOutcome::lifetime_s)
            .collect::<Option<Vec<_>>>()
            .and_then(|v| v.into_iter().reduce(f64::max))
    }

    pub fn end_s(&self) -> f64 {
        self.end_us as f64 * 1e-6
    }

    /// Joules drawn by LoRa transmit and receive across all nodes.
    pub fn lora_energy(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.ledger.get(Category::LoraTx) + n.ledger.get(Category::LoraRx))
            .sum::<f64>()
            * self.supply_voltage
    }

    /// LoRa joules per delivered payload bit.
    pub fn lora_energy_per_bit(&self) -> Option<f64> {
        (self.bits_delivered > 0).then(|| self.lora_energy() / self.bits_delivered as f64)
    }

    pub fn write_events<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "# {EVENTS_SCHEMA}")?;
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["time_s", "node", "kind", "coulombs"])
            .map_err(io)?;
        for e in &self.events {
            w.write_record([
                e.time_s().to_string(),
                e.node.to_string(),
                e.kind.name().to_string(),
                e.coulombs().to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "# {SUMMARY_SCHEMA}")?;
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut header = vec!["node", "role", "lifetime_s", "final_charge_c"];
        let cats: Vec<String> = Category::ALL.iter().map(|c| format!("{c}_c")).collect();
        header.extend(cats.iter().map(String::as_str));
        header.push("uplinks");
        w.write_record(&header).map_err(io)?;
        for n in &self.nodes {
            let mut row = vec![
                n.id.to_string(),
                if n.relay { "relay" } else { "sensor" }.to_string(),
                n.lifetime_s().map(|t| t.to_string()).unwrap_or_default(),
                n.final_charge().to_string(),
            ];
            row.extend(Category::ALL.iter().map(|&c| n.ledger.get(c).to_string()));
            row.push(n.uplinks.to_string());
            w.write_record(&row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `events.csv` and `summary.csv` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let open = |name: &str| -> Result<std::io::BufWriter<std::fs::File>> {
            Ok(std::io::BufWriter::new(std::fs::File::create(
                dir.join(name),
            )?))
        };
        self.write_events(open("events.csv")?)?;
        self.write_summary(open("summary.csv")?)
    }
}
