//! Scenario configuration in a flat `key = value` text format.
//!
//! Blank lines and lines starting with `#` are ignored. Durations accept the
//! suffixes `us`, `ms`, `s`, `min`, `h` and `d`; currents accept `uA`, `mA`
//! and `A`. Positions are written `x:y` and lists separate entries with `;`.
//! Keys not listed in [`KEYS`] are rejected.
//!
//! ```text
//! mode = isa_ci_cas
//! nodes = 2
//! leakage = lifetime
//! anomaly_period = 15min
//! duration = 200d
//! ```

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::profile::{Draw, EnergyProfile, LEAKAGE_LIFETIME, LEAKAGE_MEASURED};
use crate::energy::{CodeRate, LinkParams, LoRaParams, ReceiverParams};
use crate::error::{Error, Result};
use crate::isa::Thresholds;
use crate::protocol::ClusterParams;
use crate::trace::Channel;

macro_rules! keyword_enum {
    ($(#[$m:meta])* $name:ident { $($(#[$vm:meta])* $variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name { $($(#[$vm])* $variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::Config(format!(
                        "`{other}` is not one of {}",
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }
    };
}

keyword_enum! {
    /// Operating strategy of the sensing nodes.
    Mode {
        LoraEverySecond => "lora_every_second",
        DutyCycledLora => "duty_cycled_lora",
        Isa => "isa",
        IsaCi => "isa_ci",
        IsaCiCas => "isa_ci_cas",
    }
}

impl Mode {
    pub fn uses_isa(self) -> bool {
        matches!(self, Mode::Isa | Mode::IsaCi | Mode::IsaCiCas)
    }

    pub fn uses_ci(self) -> bool {
        matches!(self, Mode::IsaCi | Mode::IsaCiCas)
    }
}

keyword_enum! {
    /// Where sensor samples come from.
    Workload {
        SquareWave => "square_wave",
        Constant => "constant",
        Golden => "golden",
        File => "file",
    }
}

keyword_enum! {
    /// What a recorded trace does once its samples run out.
    TraceExtend {
        Fail => "none",
        Hold => "hold",
        Repeat => "repeat",
    }
}

keyword_enum! {
    /// Radio model of the every-second LoRa baseline.
    BaselineModel {
        /// Receive and transmit windows back to back, no idle time.
        Continuous => "continuous",
        /// One full uplink event per sample period.
        Literal => "literal",
    }
}

keyword_enum! {
    /// Pricing of a LoRa frame.
    LoraCost {
        /// Measured transmit, receive window and overhead per frame.
        Measured => "measured",
        /// Consumed power times on-air time: transmit for the sender,
        /// receive for a relay.
        Airtime => "airtime",
    }
}

keyword_enum! {
    StopRule {
        FirstDeath => "first_death",
        LastDeath => "last_death",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: Mode,
    /// Sensing node positions in meters; ids follow list order.
    pub positions: Vec<(f64, f64)>,
    /// Non-sensing relay positions; ids follow the sensing nodes.
    pub relays: Vec<(f64, f64)>,
    pub hub: (f64, f64),
    pub sample_period: f64,
    /// Longest gap between uplinks covering a node; 0 disables.
    pub heartbeat: f64,
    pub thresholds: Thresholds,
    pub profile: EnergyProfile,
    pub battery_mah: f64,
    pub lora: LoRaParams,
    pub link: LinkParams,
    pub receiver: ReceiverParams,
    pub cluster: ClusterParams,
    /// Longest simulated time, seconds.
    pub duration: f64,
    pub seed: u64,
    pub workload: Workload,
    /// Per-channel baselines in channel order.
    pub baselines: [f64; 3],
    pub anomaly_period: f64,
    pub anomaly_magnitude: f64,
    /// Relative uniform noise added to synthetic workloads.
    pub noise: f64,
    pub trace_file: Option<PathBuf>,
    pub trace_extend: TraceExtend,
    pub duty_period: f64,
    pub baseline_model: BaselineModel,
    pub lora_cost: LoraCost,
    pub stop: StopRule,
    pub record_events: bool,
    /// Sends a final uplink from every covering head at the end of the run.
    pub flush_at_end: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mode: Mode::IsaCiCas,
            positions: vec![(0.0, 0.0), (1.0, 0.0)],
            relays: Vec::new(),
            hub: (1_000.0, 0.0),
            sample_period: 1.0,
            heartbeat: 900.0,
            thresholds: Thresholds::default(),
            profile: EnergyProfile::default(),
            battery_mah: 230.0,
            lora: LoRaParams::default(),
            link: LinkParams::lora_reference(),
            receiver: ReceiverParams::lora_reference(),
            cluster: ClusterParams::default(),
            duration: 400.0 * 86_400.0,
            seed: 1,
            workload: Workload::SquareWave,
            baselines: [20.0, 50.0, 300.0],
            anomaly_period: 900.0,
            anomaly_magnitude: 0.15,
            noise: 0.0,
            trace_file: None,
            trace_extend: TraceExtend::Fail,
            duty_period: 900.0,
            baseline_model: BaselineModel::Continuous,
            lora_cost: LoraCost::Measured,
            stop: StopRule::LastDeath,
            record_events: true,
            flush_at_end: false,
        }
    }
}

/// Every accepted configuration key.
pub const KEYS: &[&str] = &[
    "mode",
    "nodes",
    "node_spacing",
    "positions",
    "relays",
    "hub",
    "sample_period",
    "heartbeat",
    "anomaly_x",
    "compress_y",
    "supply_voltage",
    "lora_tx_current",
    "lora_tx_duration",
    "lora_rx_current",
    "lora_rx_duration",
    "lora_overhead_j",
    "ble_current",
    "ble_duration",
    "isa_current",
    "isa_duration",
    "isa_ci_current",
    "isa_ci_duration",
    "isa_ci_cas_current",
    "isa_ci_cas_duration",
    "leakage",
    "battery_mah",
    "spreading_factor",
    "bandwidth",
    "code_rate",
    "payload_bytes",
    "preamble_bytes",
    "include_preamble",
    "tx_power_dbm",
    "tx_power_consumption",
    "rx_power_consumption",
    "carrier_frequency",
    "path_loss_exponent",
    "noise_figure_db",
    "required_snr_db",
    "ble_range",
    "similarity_tau",
    "similarity_delta",
    "similarity_window",
    "max_members",
    "duration",
    "seed",
    "workload",
    "baseline_temperature",
    "baseline_humidity",
    "baseline_nitrate",
    "anomaly_period",
    "anomaly_magnitude",
    "noise",
    "trace_file",
    "trace_extend",
    "duty_period",
    "baseline_model",
    "lora_cost",
    "stop",
    "record_events",
    "flush_at_end",
];

#[derive(Clone, Copy)]
enum Unit {
    Plain,
    Time,
    Current,
}

fn parse_number(key: &str, raw: &str, unit: Unit) -> Result<f64> {
    let raw = raw.trim();
    let suffixes: &[(&str, f64)] = match unit {
        Unit::Plain => &[],
        Unit::Time => &[
            ("us", 1e-6),
            ("ms", 1e-3),
            ("min", 60.0),
            ("s", 1.0),
            ("h", 3_600.0),
            ("d", 86_400.0),
        ],
        Unit::Current => &[("uA", 1e-6), ("mA", 1e-3), ("A", 1.0)],
    };
    let (digits, scale) = suffixes
        .iter()
        .find_map(|&(s, k)| raw.strip_suffix(s).map(|d| (d.trim_end(), k)))
        .unwrap_or((raw, 1.0));
    let v: f64 = digits
        .parse()
        .map_err(|_| Error::Config(format!("key `{key}`: `{raw}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("key `{key}`: `{raw}` is not finite")));
    }
    Ok(v * scale)
}

fn parse_int<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::Config(format!("key `{key}`: `{raw}` is not a valid integer")))
}

fn parse_bool(key: &str, raw: &str) -> Result<bool> {
    match raw.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!(
            "key `{key}`: `{other}` is not a boolean"
        ))),
    }
}

fn parse_point(key: &str, raw: &str) -> Result<(f64, f64)> {
    let (x, y) = raw
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("key `{key}`: `{raw}` is not `x:y`")))?;
    Ok((
        parse_number(key, x, Unit::Plain)?,
        parse_number(key, y, Unit::Plain)?,
    ))
}

fn parse_points(key: &str, raw: &str) -> Result<Vec<(f64, f64)>> {
    raw.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_point(key, s))
        .collect()
}

fn keyword<T: FromStr<Err = Error>>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|e: Error| {
        Error::Config(format!(
            "key `{key}`: {}",
            e.to_string().trim_start_matches("config: ")
        ))
    })
}

fn format_points(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{x}:{y}"))
        .collect::<Vec<_>>()
        .join(";")
}

impl ScenarioConfig {
    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    /// Sensing nodes plus relays.
    pub fn total_nodes(&self) -> usize {
        self.positions.len() + self.relays.len()
    }

    pub fn battery_coulombs(&self) -> f64 {
        crate::units::mah_to_coulombs(self.battery_mah)
    }

    /// Places `n` sensing nodes on a line, `spacing` meters apart.
    pub fn with_line(mut self, n: usize, spacing: f64) -> Self {
        self.positions = (0..n).map(|i| (i as f64 * spacing, 0.0)).collect();
        self
    }

    /// Parses the text format; later keys override earlier ones.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        let mut nodes: Option<usize> = None;
        let mut spacing: Option<f64> = None;
        let mut explicit_positions = false;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "nodes" => nodes = Some(parse_int(key, value)?),
                "node_spacing" => spacing = Some(parse_number(key, value, Unit::Plain)?),
                "positions" => {
                    c.positions = parse_points(key, value)?;
                    explicit_positions = true;
                }
                _ => c.set(key, value)?,
            }
        }
        if explicit_positions {
            if let Some(n) = nodes {
                if n != c.positions.len() {
                    return Err(Error::Config(format!(
                        "key `nodes`: {n} disagrees with {} listed positions",
                        c.positions.len()
                    )));
                }
            }
        } else if nodes.is_some() || spacing.is_some() {
            let n = nodes.unwrap_or(c.positions.len());
            c = c.with_line(n, spacing.unwrap_or(1.0));
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut c = Self::parse(&text)?;
        if let Some(file) = &c.trace_file {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    c.trace_file = Some(dir.join(file));
                }
            }
        }
        Ok(c)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let t = |v: &str| parse_number(key, v, Unit::Time);
        let a = |v: &str| parse_number(key, v, Unit::Current);
        let p = |v: &str| parse_number(key, v, Unit::Plain);
        let pr = &mut self.profile;
        match key {
            "mode" => self.mode = keyword(key, value)?,
            "nodes" => {
                let n: usize = parse_int(key, value)?;
                *self = std::mem::take(self).with_line(n, 1.0);
            }
            "node_spacing" => {
                let n = self.positions.len();
                *self = std::mem::take(self).with_line(n, p(value)?);
            }
            "positions" => self.positions = parse_points(key, value)?,
            "relays" => self.relays = parse_points(key, value)?,
            "hub" => self.hub = parse_point(key, value)?,
            "sample_period" => self.sample_period = t(value)?,
            "heartbeat" => self.heartbeat = t(value)?,
            "anomaly_x" => self.thresholds.anomaly_x = p(value)?,
            "compress_y" => self.thresholds.compress_y = p(value)?,
            "supply_voltage" => pr.supply_voltage = p(value)?,
            "lora_tx_current" => pr.lora_tx.current = a(value)?,
            "lora_tx_duration" => pr.lora_tx.duration = t(value)?,
            "lora_rx_current" => pr.lora_rx.current = a(value)?,
            "lora_rx_duration" => pr.lora_rx.duration = t(value)?,
            "lora_overhead_j" => pr.lora_overhead = p(value)?,
            "ble_current" => pr.ble_event.current = a(value)?,
            "ble_duration" => pr.ble_event.duration = t(value)?,
            "isa_current" => pr.isa_compute.current = a(value)?,
            "isa_duration" => pr.isa_compute.duration = t(value)?,
            "isa_ci_current" => pr.isa_ci_compute.current = a(value)?,
            "isa_ci_duration" => pr.isa_ci_compute.duration = t(value)?,
            "isa_ci_cas_current" => pr.isa_ci_cas_compute.current = a(value)?,
            "isa_ci_cas_duration" => pr.isa_ci_cas_compute.duration = t(value)?,
            "leakage" => {
                pr.leakage_current = match value {
                    "measured" => LEAKAGE_MEASURED,
                    "lifetime" => LEAKAGE_LIFETIME,
                    other => a(other)?,
                }
            }
            "battery_mah" => self.battery_mah = p(value)?,
            "spreading_factor" => self.lora.spreading_factor = parse_int(key, value)?,
            "bandwidth" => self.lora.bandwidth = p(value)?,
            "code_rate" => {
                self.lora.code_rate = CodeRate::parse(value).map_err(|_| {
                    Error::Config(format!("key `code_rate`: `{value}` is not 4/5..4/8"))
                })?
            }
            "payload_bytes" => self.lora.payload_bytes = parse_int(key, value)?,
            "preamble_bytes" => self.lora.preamble_bytes = p(value)?,
            "include_preamble" => self.lora.include_preamble_in_packet = parse_bool(key, value)?,
            "tx_power_dbm" => self.lora.tx_power_dbm = p(value)?,
            "tx_power_consumption" => self.lora.tx_power_consumption = p(value)?,
            "rx_power_consumption" => self.lora.rx_power_consumption = p(value)?,
            "carrier_frequency" => self.link.carrier_frequency = p(value)?,
            "path_loss_exponent" => self.link.path_loss_exponent = p(value)?,
            "noise_figure_db" => self.receiver.noise_figure_db = p(value)?,
            "required_snr_db" => self.receiver.required_snr_db = p(value)?,
            "ble_range" => self.cluster.ble_range = p(value)?,
            "similarity_tau" => self.cluster.tau = t(value)?,
            "similarity_delta" => self.cluster.delta = p(value)?,
            "similarity_window" => self.cluster.window = t(value)?,
            "max_members" => self.cluster.max_members = parse_int(key, value)?,
            "duration" => self.duration = t(value)?,
            "seed" => self.seed = parse_int(key, value)?,
            "workload" => self.workload = keyword(key, value)?,
            "baseline_temperature" => {
                self.baselines[Channel::Temperature.index() as usize] = p(value)?
            }
            "baseline_humidity" => self.baselines[Channel::Humidity.index() as usize] = p(value)?,
            "baseline_nitrate" => self.baselines[Channel::Nitrate.index() as usize] = p(value)?,
            "anomaly_period" => self.anomaly_period = t(value)?,
            "anomaly_magnitude" => self.anomaly_magnitude = p(value)?,
            "noise" => self.noise = p(value)?,
            "trace_file" => self.trace_file = Some(PathBuf::from(value)),
            "trace_extend" => self.trace_extend = keyword(key, value)?,
            "duty_period" => self.duty_period = t(value)?,
            "baseline_model" => self.baseline_model = keyword(key, value)?,
            "lora_cost" => self.lora_cost = keyword(key, value)?,
            "stop" => self.stop = keyword(key, value)?,
            "record_events" => self.record_events = parse_bool(key, value)?,
            "flush_at_end" => self.flush_at_end = parse_bool(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: &str| Err(Error::Config(format!("key `{key}`: {why}")));
        if self.positions.is_empty() {
            return bad("nodes", "at least one sensing node is required");
        }
        if self.total_nodes() > 256 {
            return bad("nodes", "sensing nodes and relays must fit one-byte ids");
        }
        if !(self.duration > 0.0) {
            return bad("duration", "must be > 0");
        }
        if !(self.sample_period >= 1e-6) {
            return bad("sample_period", "must be at least 1 us");
        }
        if !(self.heartbeat >= 0.0) {
            return bad("heartbeat", "must be >= 0");
        }
        if !(self.battery_mah > 0.0) || self.battery_mah > 2.0e9 {
            return bad("battery_mah", "must be positive");
        }
        if !(self.anomaly_period > 0.0) {
            return bad("anomaly_period", "must be > 0");
        }
        if !(self.duty_period >= self.sample_period) {
            return bad("duty_period", "must be at least one sample period");
        }
        if !(0.0..1.0).contains(&self.noise) {
            return bad("noise", "must lie in [0, 1)");
        }
        if !self.anomaly_magnitude.is_finite() || self.anomaly_magnitude <= -1.0 {
            return bad("anomaly_magnitude", "must be finite and above -1");
        }
        if self.workload == Workload::File && self.trace_file.is_none() {
            return bad("trace_file", "required by workload = file");
        }
        if self.cluster.max_members == 0 || self.cluster.max_members > 8 {
            return bad("max_members", "must lie in 1..=8");
        }
        self.thresholds
            .validate()
            .and_then(|_| self.profile.validate())
            .and_then(|_| self.lora.validate())
            .and_then(|_| self.link.with_distance(1.0).validate())
            .and_then(|_| self.receiver.validate())
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Writes every key; [`ScenarioConfig::parse`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let pr = &self.profile;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("mode", self.mode.to_string());
        kv("positions", format_points(&self.positions));
        kv("relays", format_points(&self.relays));
        kv("hub", format!("{}:{}", self.hub.0, self.hub.1));
        kv("sample_period", self.sample_period.to_string());
        kv("heartbeat", self.heartbeat.to_string());
        kv("anomaly_x", self.thresholds.anomaly_x.to_string());
        kv("compress_y", self.thresholds.compress_y.to_string());
        kv("supply_voltage", pr.supply_voltage.to_string());
        let draws: [(&str, &str, Draw); 6] = [
            ("lora_tx_current", "lora_tx_duration", pr.lora_tx),
            ("lora_rx_current", "lora_rx_duration", pr.lora_rx),
            ("ble_current", "ble_duration", pr.ble_event),
            ("isa_current", "isa_duration", pr.isa_compute),
            ("isa_ci_current", "isa_ci_duration", pr.isa_ci_compute),
            (
                "isa_ci_cas_current",
                "isa_ci_cas_duration",
                pr.isa_ci_cas_compute,
            ),
        ];
        for (ck, dk, d) in draws {
            kv(ck, d.current.to_string());
            kv(dk, d.duration.to_string());
        }
        kv("lora_overhead_j", pr.lora_overhead.to_string());
        kv("leakage", pr.leakage_current.to_string());
        kv("battery_mah", self.battery_mah.to_string());
        kv("spreading_factor", self.lora.spreading_factor.to_string());
        kv("bandwidth", self.lora.bandwidth.to_string());
        kv("code_rate", self.lora.code_rate.to_string());
        kv("payload_bytes", self.lora.payload_bytes.to_string());
        kv("preamble_bytes", self.lora.preamble_bytes.to_string());
        kv(
            "include_preamble",
            self.lora.include_preamble_in_packet.to_string(),
        );
        kv("tx_power_dbm", self.lora.tx_power_dbm.to_string());
        kv(
            "tx_power_consumption",
            self.lora.tx_power_consumption.to_string(),
        );
        kv(
            "rx_power_consumption",
            self.lora.rx_power_consumption.to_string(),
        );
        kv("carrier_frequency", self.link.carrier_frequency.to_string());
        kv(
            "path_loss_exponent",
            self.link.path_loss_exponent.to_string(),
        );
        kv("noise_figure_db", self.receiver.noise_figure_db.to_string());
        kv("required_snr_db", self.receiver.required_snr_db.to_string());
        kv("ble_range", self.cluster.ble_range.to_string());
        kv("similarity_tau", self.cluster.tau.to_string());
        kv("similarity_delta", self.cluster.delta.to_string());
        kv("similarity_window", self.cluster.window.to_string());
        kv("max_members", self.cluster.max_members.to_string());
        kv("duration", self.duration.to_string());
        kv("seed", self.seed.to_string());
        kv("workload", self.workload.to_string());
        for ch in Channel::ALL {
            kv(
                &format!("baseline_{ch}"),
                self.baselines[ch.index() as usize].to_string(),
            );
        }
        kv("anomaly_period", self.anomaly_period.to_string());
        kv("anomaly_magnitude", self.anomaly_magnitude.to_string());
        kv("noise", self.noise.to_string());
        if let Some(f) = &self.trace_file {
            kv("trace_file", f.display().to_string());
        }
        kv("trace_extend", self.trace_extend.to_string());
        kv("duty_period", self.duty_period.to_string());
        kv("baseline_model", self.baseline_model.to_string());
        kv("lora_cost", self.lora_cost.to_string());
        kv("stop", self.stop.to_string());
        kv("record_events", self.record_events.to_string());
        kv("flush_at_end", self.flush_at_end.to_string());
        s
    }
}
