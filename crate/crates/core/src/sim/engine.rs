//! The discrete-event loop.
//!
//! Time is an integer count of microseconds. Events at equal times run in
//! priority order, then in scheduling order. Leakage and per-sample compute
//! charge are accrued lazily: a node's battery is brought up to date only
//! when it draws a discrete radio charge, and a death check is kept
//! scheduled at the exact microsecond its charge would reach zero. Runs of
//! identical samples are skipped in one step using
//! [`TraceSource::quiet_run`].

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use log::debug;

use super::config::{BaselineModel, LoraCost, Mode, ScenarioConfig, StopRule};
use super::ledger::EnergyLedger;
use super::profile::to_attocoulombs;
use super::result::{
    HandoverRecord, HeadSpan, HubStore, LogEntry, LogKind, NodeOutcome, SimResult,
};
use super::route::route_multihop;
use super::source::{source_for, TraceSource};
use crate::energy::{lora_airtime, lora_range};
use crate::error::Result;
use crate::isa::{AnomalyDetector, AnomalyEvent, CompressedSeries, Compressor};
use crate::protocol::{
    decode_broadcast, encode_broadcast, form_clusters, spatial_compress, BatteryReport,
    CasController, ClusterState, NodeReport, SlotSchedule, UplinkPayload,
};
use crate::trace::{Channel, SensorSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ev {
    Sense { node: usize },
    RadioCycle { node: usize },
    DutyUplink { node: usize },
    Broadcast { node: usize, tick: u64 },
    NodeUplink { node: usize, tick: u64 },
    ClusterUplink { node: usize, tick: u64 },
    Announce { head: usize, next: usize },
    Ack { node: usize },
    Heartbeat { node: usize },
    Recluster,
    DeathCheck { node: usize, gen: u64 },
}

impl Ev {
    fn priority(self) -> u8 {
        match self {
            Ev::Sense { .. } | Ev::RadioCycle { .. } => 0,
            Ev::DutyUplink { .. } | Ev::Broadcast { .. } => 1,
            Ev::NodeUplink { .. } | Ev::ClusterUplink { .. } => 2,
            Ev::Announce { .. } | Ev::Ack { .. } => 3,
            Ev::Heartbeat { .. } => 4,
            Ev::Recluster => 5,
            Ev::DeathCheck { .. } => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Item {
    time: u64,
    priority: u8,
    seq: u64,
    ev: Ev,
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.priority, self.seq).cmp(&(other.time, other.priority, other.seq))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct NodeSim {
    id: u32,
    position: (f64, f64),
    relay: bool,
    alive: bool,
    death_us: Option<u64>,
    initial: i128,
    charge: i128,
    ledger: EnergyLedger,
    flush_us: u64,
    ticks_charged: u64,
    compute_ac: i128,
    leak_ac_per_us: i128,
    death_gen: u64,
    death_at: Option<u64>,
    detectors: Vec<AnomalyDetector>,
    compressors: Vec<Compressor>,
    pending_events: Vec<AnomalyEvent>,
    recent: VecDeque<AnomalyEvent>,
    last_covered_us: u64,
    sensed_ticks: u64,
    delivered_samples: u64,
    uplinks: u64,
    broadcast_seq: u16,
}

struct ClusterSlot {
    cas: CasController,
    last_uplink_tick: Option<u64>,
}

struct Costs {
    uplink_tx: i128,
    uplink_rx: i128,
    relay_rx: i128,
    ble: i128,
    cycle_tx: i128,
    cycle_rx: i128,
    cycle_us: u64,
}

struct Sim<'a> {
    cfg: &'a ScenarioConfig,
    src: &'a dyn TraceSource,
    period_us: u64,
    end_us: u64,
    total_ticks: u64,
    nodes: Vec<NodeSim>,
    n_sensing: usize,
    alive_sensing: usize,
    queue: BinaryHeap<Reverse<Item>>,
    seq: u64,
    clusters: Vec<ClusterSlot>,
    cluster_of: Vec<Option<usize>>,
    reports: Vec<Option<BatteryReport>>,
    slots: SlotSchedule,
    range: f64,
    costs: Costs,
    events: Vec<LogEntry>,
    handovers: Vec<HandoverRecord>,
    head_spans: Vec<HeadSpan>,
    hub: HubStore,
    frames_delivered: u64,
    delivery_failures: u64,
    bits_delivered: u64,
    stop_at: Option<u64>,
    now: u64,
}

fn seconds_to_us(s: f64) -> u64 {
    (s * 1e6).round() as u64
}

/// Runs `config` against its own workload source.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SimResult> {
    let source = source_for(config)?;
    run(config, source.as_ref())
}

/// Runs one scenario to its stop rule or duration.
pub fn run(config: &ScenarioConfig, source: &dyn TraceSource) -> Result<SimResult> {
    config.validate()?;
    let mut sim = Sim::new(config, source)?;
    sim.start()?;
    sim.event_loop()?;
    Ok(sim.finish())
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a ScenarioConfig, src: &'a dyn TraceSource) -> Result<Self> {
        let p = &cfg.profile;
        let v = p.supply_voltage;
        let period_us = seconds_to_us(cfg.sample_period).max(1);
        let end_us = seconds_to_us(cfg.duration).max(1);
        let airtime = lora_airtime(&cfg.lora)?;
        let costs = match cfg.lora_cost {
            LoraCost::Measured => Costs {
                uplink_tx: to_attocoulombs(p.lora_tx.charge() + p.lora_overhead / v),
                uplink_rx: to_attocoulombs(p.lora_rx.charge()),
                relay_rx: to_attocoulombs(p.lora_rx.charge()),
                ble: to_attocoulombs(p.ble_event.charge()),
                cycle_tx: to_attocoulombs(p.lora_tx.charge()),
                cycle_rx: to_attocoulombs(p.lora_rx.charge()),
                cycle_us: seconds_to_us(p.lora_tx.duration + p.lora_rx.duration).max(1),
            },
            LoraCost::Airtime => Costs {
                uplink_tx: to_attocoulombs(cfg.lora.tx_power_consumption * airtime / v),
                uplink_rx: 0,
                relay_rx: to_attocoulombs(cfg.lora.rx_power_consumption * airtime / v),
                ble: to_attocoulombs(p.ble_event.charge()),
                cycle_tx: to_attocoulombs(p.lora_tx.charge()),
                cycle_rx: to_attocoulombs(p.lora_rx.charge()),
                cycle_us: seconds_to_us(p.lora_tx.duration + p.lora_rx.duration).max(1),
            },
        };
        let compute = match cfg.mode {
            Mode::Isa => to_attocoulombs(p.isa_compute.charge()),
            Mode::IsaCi => to_attocoulombs(p.isa_ci_compute.charge()),
            Mode::IsaCiCas => to_attocoulombs(p.isa_ci_cas_compute.charge()),
            Mode::LoraEverySecond | Mode::DutyCycledLora => 0,
        };
        let initial = to_attocoulombs(cfg.battery_coulombs());
        let leak = (p.leakage_current * 1e12).round() as i128;
        let mut nodes = Vec::with_capacity(cfg.total_nodes());
        let all = cfg
            .positions
            .iter()
            .map(|&p| (p, false))
            .chain(cfg.relays.iter().map(|&p| (p, true)));
        for (i, (position, relay)) in all.enumerate() {
            let id = i as u32;
            let sensing = !relay && cfg.mode.uses_isa();
            let (detectors, compressors) = if sensing {
                (
                    Channel::ALL
                        .iter()
                        .map(|&ch| AnomalyDetector::new(id, ch, cfg.thresholds.anomaly_x))
                        .collect::<Result<Vec<_>>>()?,
                    Channel::ALL
                        .iter()
                        .map(|&ch| Compressor::new(ch, cfg.thresholds.compress_y))
                        .collect::<Result<Vec<_>>>()?,
                )
            } else {
                (Vec::new(), Vec::new())
            };
            nodes.push(NodeSim {
                id,
                position,
                relay,
                alive: true,
                death_us: None,
                initial,
                charge: initial,
                ledger: EnergyLedger::default(),
                flush_us: 0,
                ticks_charged: 0,
                compute_ac: if relay { 0 } else { compute },
                leak_ac_per_us: leak,
                death_gen: 0,
                death_at: None,
                detectors,
                compressors,
                pending_events: Vec::new(),
                recent: VecDeque::new(),
                last_covered_us: 0,
                sensed_ticks: 0,
                delivered_samples: 0,
                uplinks: 0,
                broadcast_seq: 0,
            });
        }
        let n_sensing = cfg.node_count();
        let total = nodes.len();
        Ok(Self {
            cfg,
            src,
            period_us,
            end_us,
            total_ticks: end_us.div_ceil(period_us),
            nodes,
            n_sensing,
            alive_sensing: n_sensing,
            queue: BinaryHeap::new(),
            seq: 0,
            clusters: Vec::new(),
            cluster_of: vec![None; total],
            reports: vec![None; total],
            slots: SlotSchedule::default(),
            range: lora_range(&cfg.lora, &cfg.link, &cfg.receiver)?,
            costs,
            events: Vec::new(),
            handovers: Vec::new(),
            head_spans: Vec::new(),
            hub: HubStore::new(n_sensing),
            frames_delivered: 0,
            delivery_failures: 0,
            bits_delivered: 0,
            stop_at: None,
            now: 0,
        })
    }

    fn schedule(&mut self, time: u64, ev: Ev) {
        if time >= self.end_us {
            return;
        }
        self.seq += 1;
        self.queue.push(Reverse(Item {
            time,
            priority: ev.priority(),
            seq: self.seq,
            ev,
        }));
    }

    fn log(&mut self, node: usize, kind: LogKind, charge_ac: i128) {
        if self.cfg.record_events {
            self.events.push(LogEntry {
                time_us: self.now,
                node: node as u32,
                kind,
                charge_ac,
            });
        }
    }

    fn start(&mut self) -> Result<()> {
        let cfg = self.cfg;
        for i in 0..self.nodes.len() {
            self.reschedule_death(i);
        }
        for node in 0..self.n_sensing {
            match cfg.mode {
                Mode::LoraEverySecond => self.schedule(0, Ev::RadioCycle { node }),
                Mode::DutyCycledLora => self.schedule(0, Ev::DutyUplink { node }),
                _ => {
                    self.schedule(0, Ev::Sense { node });
                    if cfg.heartbeat > 0.0 {
                        self.schedule(seconds_to_us(cfg.heartbeat), Ev::Heartbeat { node });
                    }
                }
            }
        }
        if cfg.mode.uses_ci() {
            self.recluster()?;
            if cfg.cluster.window > 0.0 {
                self.schedule(seconds_to_us(cfg.cluster.window), Ev::Recluster);
            }
        }
        Ok(())
    }

    fn event_loop(&mut self) -> Result<()> {
        while let Some(Reverse(item)) = self.queue.pop() {
            self.now = item.time;
            self.handle(item.ev)?;
            if self.stop_at.is_some() {
                break;
            }
        }
        Ok(())
    }

    fn handle(&mut self, ev: Ev) -> Result<()> {
        match ev {
            Ev::Sense { node } => self.sense(node)?,
            Ev::RadioCycle { node } => self.radio_cycle(node),
            Ev::DutyUplink { node } => self.duty_uplink(node)?,
            Ev::Broadcast { node, tick } => self.broadcast(node, tick)?,
            Ev::NodeUplink { node, tick } => {
                if self.nodes[node].alive {
                    let _ = tick;
                    self.isa_uplink(node)?;
                }
            }
            Ev::ClusterUplink { node, tick } => self.cluster_uplink(node, Some(tick))?,
            Ev::Announce { head, next } => self.announce(head, next),
            Ev::Ack { node } => self.ack(node),
            Ev::Heartbeat { node } => self.heartbeat(node)?,
            Ev::Recluster => {
                self.recluster()?;
                let w = seconds_to_us(self.cfg.cluster.window);
                self.schedule(self.now + w, Ev::Recluster);
            }
            Ev::DeathCheck { node, gen } => {
                if self.nodes[node].alive && self.nodes[node].death_gen == gen {
                    self.touch(node);
                }
            }
        }
        Ok(())
    }

    // ----- battery -----

    fn ticks_through(&self, node: usize, t: u64) -> u64 {
        if self.nodes[node].compute_ac == 0 {
            return 0;
        }
        (t / self.period_us + 1).min(self.total_ticks)
    }

    fn charge_at(&self, node: usize, t: u64) -> i128 {
        let n = &self.nodes[node];
        let ticks = self.ticks_through(node, t).saturating_sub(n.ticks_charged);
        n.charge - n.leak_ac_per_us * i128::from(t - n.flush_us) - n.compute_ac * i128::from(ticks)
    }

    /// Earliest microsecond at or after the last flush where the charge
    /// reaches zero without further radio activity.
    fn predict_death(&self, node: usize) -> Option<u64> {
        let n = &self.nodes[node];
        let from = n.flush_us;
        if self.charge_at(node, from) <= 0 {
            return Some(from);
        }
        if n.leak_ac_per_us == 0 && n.compute_ac == 0 {
            return None;
        }
        if self.charge_at(node, self.end_us) > 0 {
            return None;
        }
        let (mut lo, mut hi) = (from, self.end_us);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.charge_at(node, mid) > 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }

    fn reschedule_death(&mut self, node: usize) {
        let at = self.predict_death(node);
        let n = &mut self.nodes[node];
        n.death_gen += 1;
        n.death_at = at;
        let gen = n.death_gen;
        if let Some(t) = at {
            self.schedule(t, Ev::DeathCheck { node, gen });
        }
    }

    fn flush(&mut self, node: usize) {
        let now = self.now;
        let target = self.ticks_through(node, now);
        let n = &mut self.nodes[node];
        let leak = n.leak_ac_per_us * i128::from(now - n.flush_us);
        let compute = n.compute_ac * i128::from(target.saturating_sub(n.ticks_charged));
        n.flush_us = now;
        n.ticks_charged = n.ticks_charged.max(target);
        n.charge -= leak + compute;
        n.ledger.add(LogKind::Leakage.category().unwrap(), leak);
        n.ledger.add(LogKind::Compute.category().unwrap(), compute);
        if compute > 0 {
            self.log(node, LogKind::Compute, compute);
        }
        if leak > 0 {
            self.log(node, LogKind::Leakage, leak);
        }
    }

    /// Brings the node's battery up to date; false if it is (now) dead.
    fn touch(&mut self, node: usize) -> bool {
        if !self.nodes[node].alive {
            return false;
        }
        self.flush(node);
        if self.nodes[node].charge <= 0 {
            self.die(node);
            return false;
        }
        true
    }

    /// Whether the node is alive without touching its battery.
    fn alive_now(&self, node: usize) -> bool {
        let n = &self.nodes[node];
        n.alive && n.death_at.is_none_or(|t| t > self.now)
    }

    fn draw(&mut self, node: usize, kind: LogKind, ac: i128) {
        let n = &mut self.nodes[node];
        n.charge -= ac;
        n.ledger.add(kind.category().expect("charged kind"), ac);
        self.log(node, kind, ac);
        if self.nodes[node].charge <= 0 {
            self.die(node);
        } else {
            self.reschedule_death(node);
        }
    }

    fn die(&mut self, node: usize) {
        let now = self.now;
        let n = &mut self.nodes[node];
        n.alive = false;
        n.death_us = Some(now);
        n.death_gen += 1;
        let sensing = !n.relay;
        debug!("node {} died at {} s", node, now as f64 * 1e-6);
        self.log(node, LogKind::Death, 0);
        if sensing {
            self.alive_sensing -= 1;
            if self.cfg.stop == StopRule::FirstDeath || self.alive_sensing == 0 {
                self.stop_at = Some(now);
            }
        }
        if let Some(c) = self.cluster_of[node].take() {
            let reports = if self.cfg.mode == Mode::IsaCiCas {
                self.member_reports(c)
            } else {
                Vec::new()
            };
            if let Some(head) = self.clusters[c].cas.remove_member(node as u32, &reports) {
                self.log(head as usize, LogKind::HeadChange, 0);
                self.push_span(c);
            }
        }
    }

    fn push_span(&mut self, c: usize) {
        let cl = self.clusters[c].cas.cluster();
        if cl.members.is_empty() {
            return;
        }
        self.head_spans.push(HeadSpan {
            time_us: self.now,
            members: cl.members.clone(),
            head: cl.head,
        });
    }

    // ----- sensing -----

    fn sense(&mut self, node: usize) -> Result<()> {
        if !self.alive_now(node) {
            if self.nodes[node].alive {
                self.touch(node);
            }
            return Ok(());
        }
        let tick = self.now / self.period_us;
        let remaining = self.total_ticks - tick - 1;
        let quiet = self.src.quiet_run(node, tick).min(remaining);
        let mut fresh = Vec::new();
        for (i, &ch) in Channel::ALL.iter().enumerate() {
            let value = self.src.sample(node, ch, tick)?;
            let sample = SensorSample::new(tick as f64, value, ch);
            let n = &mut self.nodes[node];
            if let Some(e) = n.detectors[i].push(&sample) {
                fresh.push(e);
            }
            n.compressors[i].push(&sample);
            n.compressors[i].skip_repeats(quiet as usize);
        }
        self.nodes[node].sensed_ticks += 1 + quiet;
        if !fresh.is_empty() {
            self.on_anomalies(node, tick, fresh);
        }
        let next = (tick + quiet + 1) * self.period_us;
        self.schedule(next, Ev::Sense { node });
        Ok(())
    }

    fn on_anomalies(&mut self, node: usize, tick: u64, fresh: Vec<AnomalyEvent>) {
        let window = self.cfg.cluster.window / self.cfg.sample_period;
        let n = &mut self.nodes[node];
        n.recent.extend(fresh.iter().copied());
        while n
            .recent
            .front()
            .is_some_and(|e| e.anomaly_time <= tick as f64 - window)
        {
            n.recent.pop_front();
        }
        n.pending_events = fresh;
        match self.cfg.mode {
            Mode::Isa => self.schedule(self.now, Ev::NodeUplink { node, tick }),
            Mode::IsaCi | Mode::IsaCiCas => {
                let delay = self.slots.delay_us(node as u32).unwrap_or(0);
                self.schedule(self.now + delay, Ev::Broadcast { node, tick });
                if let Some(c) = self.cluster_of[node] {
                    let last = *self.clusters[c].cas.cluster().members.last().unwrap();
                    let after = self.slots.delay_us(last + 1).unwrap_or(0);
                    self.schedule(self.now + after, Ev::ClusterUplink { node, tick });
                }
            }
            _ => {}
        }
    }

    fn broadcast(&mut self, node: usize, _tick: u64) -> Result<()> {
        if !self.touch(node) {
            return Ok(());
        }
        let ble = self.costs.ble;
        self.draw(node, LogKind::BleBroadcast, ble);
        if !self.nodes[node].alive {
            return Ok(());
        }
        let period = self.cfg.sample_period;
        let n = &mut self.nodes[node];
        let events: Vec<AnomalyEvent> = n
            .pending_events
            .drain(..)
            .map(|e| AnomalyEvent {
                anomaly_time: e.anomaly_time * period,
                ..e
            })
            .collect();
        let report = BatteryReport {
            node_id: n.id,
            charge_remaining: super::profile::to_coulombs(n.charge),
            reported_at: self.now as f64 * 1e-6,
        };
        n.broadcast_seq = n.broadcast_seq.wrapping_add(1);
        let packets = encode_broadcast(&events, &report, n.broadcast_seq)?;
        let decoded = decode_broadcast(&packets, report.reported_at)?;
        self.reports[node] = Some(decoded.battery);
        Ok(())
    }

    // ----- uplinks -----

    /// Sends one LoRa frame from `sender` towards the hub through live
    /// relays. Returns whether it was delivered.
    fn send_frame(&mut self, sender: usize) -> bool {
        let relays: Vec<(u32, (f64, f64))> = (self.n_sensing..self.nodes.len())
            .filter(|&r| self.alive_now(r))
            .map(|r| (r as u32, self.nodes[r].position))
            .collect();
        let route = route_multihop(
            self.nodes[sender].position,
            self.cfg.hub,
            &relays,
            self.range,
        );
        self.nodes[sender].uplinks += 1;
        let (tx, rx) = (self.costs.uplink_tx, self.costs.uplink_rx);
        self.draw(sender, LogKind::LoraTx, tx);
        let Some(chain) = route else {
            self.log(sender, LogKind::DeliveryFailed, 0);
            self.delivery_failures += 1;
            return false;
        };
        if rx > 0 && self.nodes[sender].alive {
            self.draw(sender, LogKind::LoraRxWindow, rx);
        }
        for r in chain {
            let r = r as usize;
            if !self.touch(r) {
                self.log(sender, LogKind::DeliveryFailed, 0);
                self.delivery_failures += 1;
                return false;
            }
            let relay_rx = self.costs.relay_rx;
            self.draw(r, LogKind::RelayRx, relay_rx);
            if !self.nodes[r].alive {
                continue;
            }
            self.draw(r, LogKind::LoraTx, tx);
            if rx > 0 && self.nodes[r].alive {
                self.draw(r, LogKind::LoraRxWindow, rx);
            }
        }
        self.frames_delivered += 1;
        self.bits_delivered += u64::from(self.cfg.lora.payload_bytes) * 8;
        true
    }

    fn radio_cycle(&mut self, node: usize) {
        if !self.touch(node) {
            return;
        }
        match self.cfg.baseline_model {
            BaselineModel::Continuous => {
                let (rx, tx) = (self.costs.cycle_rx, self.costs.cycle_tx);
                self.draw(node, LogKind::LoraRxWindow, rx);
                if self.nodes[node].alive {
                    self.draw(node, LogKind::LoraTx, tx);
                }
                self.nodes[node].uplinks += 1;
                self.frames_delivered += 1;
                self.bits_delivered += u64::from(self.cfg.lora.payload_bytes) * 8;
                let next = self.now + self.costs.cycle_us;
                self.schedule(next, Ev::RadioCycle { node });
            }
            BaselineModel::Literal => {
                if self.send_frame(node) {
                    self.nodes[node].delivered_samples += 1;
                }
                let next = self.now + self.period_us;
                self.schedule(next, Ev::RadioCycle { node });
            }
        }
    }

    fn duty_uplink(&mut self, node: usize) -> Result<()> {
        if !self.touch(node) {
            return Ok(());
        }
        let tick = self.now / self.period_us;
        let mut values = [0.0; 3];
        for (i, &ch) in Channel::ALL.iter().enumerate() {
            values[i] = self.src.sample(node, ch, tick)?;
        }
        if self.send_frame(node) {
            self.nodes[node].delivered_samples += 1;
            for (i, &v) in values.iter().enumerate() {
                self.hub.samples[node][i].push((tick, v));
            }
            self.hub.covered_until[node] = Some(tick);
        }
        let next = self.now + seconds_to_us(self.cfg.duty_period);
        self.schedule(next, Ev::DutyUplink { node });
        Ok(())
    }

    fn drain_series(&mut self, node: usize) -> Vec<CompressedSeries> {
        self.nodes[node]
            .compressors
            .iter_mut()
            .map(Compressor::drain)
            .filter(|s| !s.kept.is_empty())
            .collect()
    }

    /// Frames `payload`, sends every frame and records delivered data for
    /// every node in `covered`.
    fn deliver_payload(
        &mut self,
        sender: usize,
        payload: &UplinkPayload,
        covered: &[u32],
    ) -> Result<()> {
        let frames = payload.to_frames(self.cfg.lora.payload_bytes as usize)?;
        let mut delivered = true;
        for _ in &frames {
            if !self.send_frame(sender) {
                delivered = false;
            }
        }
        let tick = (self.now / self.period_us).min(self.total_ticks - 1);
        for &m in covered {
            self.nodes[m as usize].last_covered_us = self.now;
        }
        if !delivered {
            return Ok(());
        }
        let received = UplinkPayload::from_frames(&frames)?;
        for &m in covered {
            let m = m as usize;
            if m >= self.n_sensing {
                continue;
            }
            for s in &received.series {
                let column = &mut self.hub.samples[m][usize::from(s.channel.index())];
                column.extend(s.kept.iter().map(|k| (k.timestamp as u64, k.value)));
            }
            self.hub.covered_until[m] = Some(tick);
        }
        Ok(())
    }

    fn isa_uplink(&mut self, node: usize) -> Result<()> {
        if !self.touch(node) {
            return Ok(());
        }
        let series = self.drain_series(node);
        let cluster = ClusterState::new(vec![node as u32], 0.0, 0.0)?;
        let own = self.own_report(node);
        let payload = spatial_compress(&cluster, &BTreeMap::from([(node as u32, series)]), &[own]);
        self.deliver_payload(node, &payload, &[node as u32])
    }

    fn own_report(&self, node: usize) -> BatteryReport {
        BatteryReport {
            node_id: node as u32,
            charge_remaining: super::profile::to_coulombs(self.nodes[node].charge),
            reported_at: self.now as f64 * 1e-6,
        }
    }

    /// Latest reports of a cluster's members, with the head's own charge.
    fn member_reports(&self, c: usize) -> Vec<BatteryReport> {
        let cl = self.clusters[c].cas.cluster();
        cl.members
            .iter()
            .filter_map(|&m| {
                if m == cl.head && self.nodes[m as usize].alive {
                    Some(self.own_report(m as usize))
                } else {
                    self.reports[m as usize]
                }
            })
            .collect()
    }

    fn cluster_uplink(&mut self, trigger: usize, tick: Option<u64>) -> Result<()> {
        let Some(c) = self.cluster_of[trigger] else {
            return Ok(());
        };
        if tick.is_some() && self.clusters[c].last_uplink_tick == tick {
            return Ok(());
        }
        let head = self.clusters[c].cas.head() as usize;
        if !self.touch(head) {
            return Ok(());
        }
        let Some(c) = self.cluster_of[head] else {
            return Ok(());
        };
        self.clusters[c].last_uplink_tick = tick.or(self.clusters[c].last_uplink_tick);
        let cluster = self.clusters[c].cas.cluster().clone();
        let mut series = BTreeMap::new();
        series.insert(head as u32, self.drain_series(head));
        for m in cluster.followers() {
            self.drain_series(m as usize);
        }
        let reports = self.member_reports(c);
        let payload = spatial_compress(&cluster, &series, &reports);
        self.deliver_payload(head, &payload, &cluster.members)?;
        if self.cfg.mode == Mode::IsaCiCas && self.nodes[head].alive {
            let reports = self.member_reports(c);
            let now_s = self.now as f64 * 1e-6;
            if let Some(msg) = self.clusters[c].cas.evaluate(&reports, now_s) {
                self.handovers.push(HandoverRecord {
                    time_us: self.now,
                    from: msg.from,
                    to: msg.next_head,
                    reports: reports
                        .iter()
                        .map(|r| (r.node_id, r.charge_remaining))
                        .collect(),
                });
                let at = self.now + self.slots.delay_us(1).unwrap_or(0);
                self.schedule(
                    at,
                    Ev::Announce {
                        head,
                        next: msg.next_head as usize,
                    },
                );
            }
        }
        Ok(())
    }

    fn announce(&mut self, head: usize, next: usize) {
        if !self.touch(head) {
            return;
        }
        let ble = self.costs.ble;
        self.draw(head, LogKind::HandoverAnnounce, ble);
        let at = self.now + self.slots.delay_us(1).unwrap_or(0);
        self.schedule(at, Ev::Ack { node: next });
    }

    fn ack(&mut self, node: usize) {
        let Some(c) = self.cluster_of[node] else {
            return;
        };
        if !matches!(self.clusters[c].cas.phase(), crate::protocol::CasPhase::Handover { next_head, .. } if next_head as usize == node)
        {
            return;
        }
        if !self.touch(node) {
            return;
        }
        let ble = self.costs.ble;
        self.draw(node, LogKind::HandoverAck, ble);
        if !self.nodes[node].alive {
            return;
        }
        if let Some(c) = self.cluster_of[node] {
            if self.clusters[c].cas.acknowledge(node as u32) {
                self.log(node, LogKind::HeadChange, 0);
                self.push_span(c);
            }
        }
    }

    fn heartbeat(&mut self, node: usize) -> Result<()> {
        if !self.alive_now(node) {
            return Ok(());
        }
        let h = seconds_to_us(self.cfg.heartbeat);
        let due = self.nodes[node].last_covered_us + h;
        if self.now < due {
            self.schedule(due, Ev::Heartbeat { node });
            return Ok(());
        }
        match self.cfg.mode {
            Mode::Isa => self.isa_uplink(node)?,
            _ => self.cluster_uplink(node, None)?,
        }
        let next = self.nodes[node].last_covered_us.max(self.now) + h;
        self.schedule(next, Ev::Heartbeat { node });
        Ok(())
    }

    // ----- clustering -----

    fn recluster(&mut self) -> Result<()> {
        let period = self.cfg.sample_period;
        let reports: Vec<NodeReport> = (0..self.n_sensing)
            .filter(|&i| self.alive_now(i))
            .map(|i| NodeReport {
                node_id: i as u32,
                position: self.nodes[i].position,
                history: self.nodes[i]
                    .recent
                    .iter()
                    .map(|e| AnomalyEvent {
                        anomaly_time: e.anomaly_time * period,
                        ..*e
                    })
                    .collect(),
            })
            .collect();
        let formed = form_clusters(&reports, &self.cfg.cluster, self.now as f64 * 1e-6)?;
        let old = std::mem::take(&mut self.clusters);
        let old_of = std::mem::replace(&mut self.cluster_of, vec![None; self.nodes.len()]);
        for mut state in formed {
            let same = old
                .iter()
                .position(|o| o.cas.cluster().members == state.members);
            let slot = if let Some(i) = same {
                ClusterSlot {
                    cas: old[i].cas.clone(),
                    last_uplink_tick: old[i].last_uplink_tick,
                }
            } else {
                let prev_heads: Vec<u32> = state
                    .members
                    .iter()
                    .copied()
                    .filter(|&m| old_of[m as usize].is_some_and(|c| old[c].cas.head() == m))
                    .collect();
                if let Some(&h) = prev_heads.first() {
                    state.head = h;
                }
                let last = state
                    .members
                    .iter()
                    .filter_map(|&m| old_of[m as usize].and_then(|c| old[c].last_uplink_tick))
                    .max();
                ClusterSlot {
                    cas: CasController::new(state),
                    last_uplink_tick: last,
                }
            };
            let idx = self.clusters.len();
            for &m in &slot.cas.cluster().members {
                self.cluster_of[m as usize] = Some(idx);
            }
            let changed = same.is_none();
            self.clusters.push(slot);
            if changed {
                self.push_span(idx);
            }
        }
        Ok(())
    }

    // ----- wrap-up -----

    fn finish(mut self) -> SimResult {
        let end = self.stop_at.unwrap_or(self.end_us);
        self.now = end;
        if self.stop_at.is_none() && self.cfg.flush_at_end && self.cfg.mode.uses_isa() {
            for node in 0..self.n_sensing {
                if !self.alive_now(node) {
                    continue;
                }
                let result = match self.cfg.mode {
                    Mode::Isa => self.isa_uplink(node),
                    _ => {
                        let is_head = self.cluster_of[node]
                            .is_some_and(|c| self.clusters[c].cas.head() as usize == node);
                        if is_head {
                            self.cluster_uplink(node, None)
                        } else {
                            Ok(())
                        }
                    }
                };
                if let Err(e) = result {
                    log::warn!("final uplink of node {node} failed: {e}");
                }
            }
        }
        for i in 0..self.nodes.len() {
            self.touch(i);
        }
        let period_us = self.period_us;
        let total_ticks = self.total_ticks;
        let continuous = self.cfg.mode == Mode::LoraEverySecond
            && self.cfg.baseline_model == BaselineModel::Continuous;
        let raw = !self.cfg.mode.uses_isa();
        let nodes = self
            .nodes
            .into_iter()
            .map(|n| {
                let until = n.death_us.unwrap_or(end);
                let ticks = if n.death_us.is_some() {
                    (until / period_us + 1).min(total_ticks)
                } else {
                    until.div_ceil(period_us).min(total_ticks)
                };
                let sensed = if n.relay {
                    0
                } else if raw {
                    ticks
                } else {
                    n.sensed_ticks
                };
                NodeOutcome {
                    id: n.id,
                    relay: n.relay,
                    position: n.position,
                    death_us: n.death_us,
                    initial_ac: n.initial,
                    final_ac: n.charge,
                    ledger: n.ledger,
                    sensed_ticks: sensed,
                    delivered_samples: if continuous && !n.relay {
                        sensed
                    } else {
                        n.delivered_samples
                    },
                    uplinks: n.uplinks,
                }
            })
            .collect();
        SimResult {
            mode: self.cfg.mode,
            seed: self.cfg.seed,
            sample_period_us: period_us,
            end_us: end,
            nodes,
            events: self.events,
            handovers: self.handovers,
            head_spans: self.head_spans,
            hub: self.hub,
            frames_delivered: self.frames_delivered,
            delivery_failures: self.delivery_failures,
            bits_delivered: self.bits_delivered,
            supply_voltage: self.cfg.profile.supply_voltage,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ladder::rung_config;
    use crate::sim::result::LogKind;

    fn short(mode: Mode, nodes: usize, days: f64) -> ScenarioConfig {
        let mut c = rung_config(mode).with_line(nodes, 1.0);
        c.duration = days * 86400.0;
        c.record_events = true;
        c
    }

    #[test]
    fn ledgers_balance_exactly() {
        for mode in Mode::ALL {
            let r = run_scenario(&short(*mode, 3, 2.0)).unwrap();
            for n in &r.nodes {
                assert_eq!(n.conservation_error_ac(), 0, "{mode} node {}", n.id);
            }
        }
    }

    #[test]
    fn logged_draws_sum_to_ledger() {
        let r = run_scenario(&short(Mode::IsaCiCas, 3, 3.0)).unwrap();
        for n in &r.nodes {
            let logged: i128 = r
                .events
                .iter()
                .filter(|e| e.node == n.id)
                .map(|e| e.charge_ac)
                .sum();
            assert_eq!(logged, n.ledger.total_attocoulombs());
        }
    }

    #[test]
    fn identical_runs_are_identical() {
        let c = short(Mode::IsaCiCas, 4, 2.0);
        assert_eq!(run_scenario(&c).unwrap(), run_scenario(&c).unwrap());
    }

    #[test]
    fn idle_node_dies_at_leakage_and_compute_floor() {
        let mut c = rung_config(Mode::Isa);
        c.workload = crate::sim::Workload::Constant;
        c.heartbeat = 0.0;
        let r = run_scenario(&c).unwrap();
        assert_eq!(r.frames_delivered, 0);
        let p = &c.profile;
        let current = p.leakage_current + p.isa_compute.charge() / c.sample_period;
        let expected = c.battery_coulombs() / current;
        let got = r.first_death_s().unwrap();
        assert!(
            (got - expected).abs() / expected < 0.01,
            "{got} vs {expected}"
        );
    }

    #[test]
    fn dead_nodes_stay_silent() {
        let mut c = rung_config(Mode::IsaCi).with_line(3, 1.0);
        c.record_events = true;
        c.battery_mah = 20.0;
        let r = run_scenario(&c).unwrap();
        for n in &r.nodes {
            let death = n.death_us.unwrap();
            assert!(r
                .events
                .iter()
                .filter(|e| e.node == n.id && e.time_us > death)
                .all(|e| e.charge_ac == 0 && e.kind != LogKind::Death));
            assert!(r
                .head_spans
                .iter()
                .all(|s| !(s.time_us > death && s.head == n.id)));
        }
    }

    #[test]
    fn rotation_keeps_batteries_close() {
        let c = short(Mode::IsaCiCas, 4, 30.0);
        let r = run_scenario(&c).unwrap();
        let p = &c.profile;
        let bound = to_attocoulombs(
            p.lora_uplink_charge() + 3.0 * p.ble_event.charge() + p.isa_ci_cas_compute.charge(),
        );
        let charges: Vec<i128> = r.nodes.iter().map(|n| n.final_ac).collect();
        let spread = charges.iter().max().unwrap() - charges.iter().min().unwrap();
        assert!(spread <= bound, "spread {spread} > {bound}");
    }

    #[test]
    fn unreachable_hub_still_charges_transmit() {
        let mut c = short(Mode::Isa, 1, 1.0);
        c.hub = (50_000.0, 0.0);
        let r = run_scenario(&c).unwrap();
        assert!(r.delivery_failures > 0);
        assert_eq!(r.frames_delivered, 0);
        assert!(r.nodes[0].ledger.get(crate::sim::Category::LoraTx) > 0.0);
        assert!(r.events.iter().any(|e| e.kind == LogKind::DeliveryFailed));
    }

    #[test]
    fn first_death_stop_ends_early() {
        let mut c = rung_config(Mode::IsaCi).with_line(2, 1.0);
        c.stop = StopRule::FirstDeath;
        let r = run_scenario(&c).unwrap();
        assert_eq!(r.nodes.iter().filter(|n| n.death_us.is_some()).count(), 1);
    }
}
