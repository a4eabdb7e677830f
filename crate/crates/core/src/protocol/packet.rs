//! BLE broadcast packets.
//!
//! ```text
//! header  (8)  magic u16 | channel u8 | flags u8 | seq u16 | crc16 u16
//! payload (31) device_id u8 | value_before f64 | anomaly_time u64 |
//!              value_after f64 | battery u48 (uAh)
//! ```
//!
//! All multi-byte fields are little-endian. The CRC covers the payload.
//! Flag bit 0 marks a packet carrying an event, bit 1 a saturated battery
//! field. A channel without an event carries [`NO_EVENT_TIME`] and zero
//! values.

use log::warn;

use super::cas::BatteryReport;
use super::crc::crc16;
use crate::error::{Error, Result};
use crate::isa::AnomalyEvent;
use crate::trace::Channel;
use crate::units::COULOMBS_PER_UAH;

pub const HEADER_LEN: usize = 8;
pub const PAYLOAD_LEN: usize = 31;
pub const PACKET_LEN: usize = HEADER_LEN + PAYLOAD_LEN;
pub const BROADCAST_PACKETS: usize = 3;
pub const MAGIC: u16 = 0x15A0;
pub const NO_EVENT_TIME: u64 = u64::MAX;

const FLAG_EVENT: u8 = 0b01;
const FLAG_SATURATED: u8 = 0b10;
const BATTERY_MAX_UAH: u64 = (1 << 48) - 1;

/// The event fields of one packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketEvent {
    pub value_before: f64,
    pub anomaly_time: u64,
    pub value_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlePacket {
    pub channel: Channel,
    pub seq: u16,
    pub device_id: u8,
    pub event: Option<PacketEvent>,
    pub battery_uah: u64,
    pub battery_saturated: bool,
}

impl BlePacket {
    pub fn to_bytes(&self) -> [u8; PACKET_LEN] {
        let mut b = [0u8; PACKET_LEN];
        let mut flags = 0;
        if self.event.is_some() {
            flags |= FLAG_EVENT;
        }
        if self.battery_saturated {
            flags |= FLAG_SATURATED;
        }
        b[0..2].copy_from_slice(&MAGIC.to_le_bytes());
        b[2] = self.channel.index();
        b[3] = flags;
        b[4..6].copy_from_slice(&self.seq.to_le_bytes());

        let p = &mut b[HEADER_LEN..];
        p[0] = self.device_id;
        let (before, time, after) = match self.event {
            Some(e) => (e.value_before, e.anomaly_time, e.value_after),
            None => (0.0, NO_EVENT_TIME, 0.0),
        };
        p[1..9].copy_from_slice(&before.to_le_bytes());
        p[9..17].copy_from_slice(&time.to_le_bytes());
        p[17..25].copy_from_slice(&after.to_le_bytes());
        p[25..31].copy_from_slice(&self.battery_uah.min(BATTERY_MAX_UAH).to_le_bytes()[..6]);

        let crc = crc16(&b[HEADER_LEN..]);
        b[6..8].copy_from_slice(&crc.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() != PACKET_LEN {
            return Err(Error::Packet(format!("length {} != {PACKET_LEN}", b.len())));
        }
        let u16_at = |i: usize| u16::from_le_bytes([b[i], b[i + 1]]);
        if u16_at(0) != MAGIC {
            return Err(Error::Packet(format!("bad magic {:#06x}", u16_at(0))));
        }
        let crc = crc16(&b[HEADER_LEN..]);
        if u16_at(6) != crc {
            return Err(Error::Packet(format!(
                "crc mismatch: header {:#06x}, payload {crc:#06x}",
                u16_at(6)
            )));
        }
        let channel = Channel::from_index(b[2])
            .ok_or_else(|| Error::Packet(format!("unknown channel index {}", b[2])))?;
        let flags = b[3];
        if flags & !(FLAG_EVENT | FLAG_SATURATED) != 0 {
            return Err(Error::Packet(format!("unknown flags {flags:#04x}")));
        }
        let p = &b[HEADER_LEN..];
        let f64_at = |i: usize| f64::from_le_bytes(p[i..i + 8].try_into().unwrap());
        let time = u64::from_le_bytes(p[9..17].try_into().unwrap());
        let mut battery = [0u8; 8];
        battery[..6].copy_from_slice(&p[25..31]);
        let event = if flags & FLAG_EVENT != 0 {
            if time == NO_EVENT_TIME {
                return Err(Error::Packet("event flag set with sentinel time".into()));
            }
            Some(PacketEvent {
                value_before: f64_at(1),
                anomaly_time: time,
                value_after: f64_at(17),
            })
        } else {
            if time != NO_EVENT_TIME {
                return Err(Error::Packet(
                    "event time present without event flag".into(),
                ));
            }
            None
        };
        Ok(Self {
            channel,
            seq: u16_at(4),
            device_id: p[0],
            event,
            battery_uah: u64::from_le_bytes(battery),
            battery_saturated: flags & FLAG_SATURATED != 0,
        })
    }
}

/// A decoded broadcast event: the sender's anomalies and battery level.
#[derive(Debug, Clone, PartialEq)]
pub struct Broadcast {
    pub seq: u16,
    pub events: Vec<AnomalyEvent>,
    pub battery: BatteryReport,
}

fn charge_to_uah(charge: f64) -> (u64, bool) {
    let uah = (charge.max(0.0) / COULOMBS_PER_UAH).round();
    if uah > BATTERY_MAX_UAH as f64 {
        (BATTERY_MAX_UAH, true)
    } else {
        (uah as u64, false)
    }
}

/// Encodes one broadcast: one packet per channel, in channel order.
///
/// Times are sent as whole seconds and the battery as whole microampere-hours.
pub fn encode_broadcast(
    events: &[AnomalyEvent],
    battery: &BatteryReport,
    seq: u16,
) -> Result<[BlePacket; BROADCAST_PACKETS]> {
    let device_id = u8::try_from(battery.node_id).map_err(|_| {
        Error::invalid("device_id", format!("{} exceeds one byte", battery.node_id))
    })?;
    let mut per_channel: [Option<PacketEvent>; BROADCAST_PACKETS] = [None; BROADCAST_PACKETS];
    for e in events {
        if e.node_id != battery.node_id {
            return Err(Error::invalid(
                "events",
                format!(
                    "event from node {} in broadcast of node {}",
                    e.node_id, battery.node_id
                ),
            ));
        }
        if !(e.anomaly_time >= 0.0) || e.anomaly_time >= NO_EVENT_TIME as f64 {
            return Err(Error::invalid(
                "anomaly_time",
                format!("{}", e.anomaly_time),
            ));
        }
        let slot = &mut per_channel[usize::from(e.channel.index())];
        if slot.is_some() {
            return Err(Error::invalid(
                "events",
                format!("two events on {}", e.channel),
            ));
        }
        *slot = Some(PacketEvent {
            value_before: e.value_before,
            anomaly_time: e.anomaly_time.round() as u64,
            value_after: e.value_after,
        });
    }
    let (battery_uah, battery_saturated) = charge_to_uah(battery.charge_remaining);
    if battery_saturated {
        warn!(
            "battery {} C of node {} saturates the 48-bit field",
            battery.charge_remaining, battery.node_id
        );
    }
    Ok(Channel::ALL.map(|channel| BlePacket {
        channel,
        seq,
        device_id,
        event: per_channel[usize::from(channel.index())],
        battery_uah,
        battery_saturated,
    }))
}

/// Reassembles a broadcast; `received_at` stamps the battery report.
pub fn decode_broadcast(packets: &[BlePacket], received_at: f64) -> Result<Broadcast> {
    if packets.len() != BROADCAST_PACKETS {
        return Err(Error::Packet(format!(
            "broadcast has {} packets, expected {BROADCAST_PACKETS}",
            packets.len()
        )));
    }
    let first = packets[0];
    let mut seen = [false; BROADCAST_PACKETS];
    let mut events = Vec::new();
    for p in packets {
        if p.device_id != first.device_id
            || p.seq != first.seq
            || p.battery_uah != first.battery_uah
        {
            return Err(Error::Packet(
                "packets disagree on sender, sequence or battery".into(),
            ));
        }
        let i = usize::from(p.channel.index());
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Packet(format!("duplicate {} packet", p.channel)));
        }
        if let Some(e) = p.event {
            events.push(AnomalyEvent {
                node_id: u32::from(p.device_id),
                channel: p.channel,
                value_before: e.value_before,
                anomaly_time: e.anomaly_time as f64,
                value_after: e.value_after,
            });
        }
    }
    events.sort_by_key(|e| e.channel);
    Ok(Broadcast {
        seq: first.seq,
        events,
        battery: BatteryReport {
            node_id: u32::from(first.device_id),
            charge_remaining: first.battery_uah as f64 * COULOMBS_PER_UAH,
            reported_at: received_at,
        },
    })
}

/// One packet per line, lowercase hex.
pub fn to_hex_lines(packets: &[BlePacket]) -> String {
    let mut out = String::with_capacity(packets.len() * (2 * PACKET_LEN + 1));
    for p in packets {
        for byte in p.to_bytes() {
            out.push_str(&format!("{byte:02x}"));
        }
        out.push('\n');
    }
    out
}

/// Parses [`to_hex_lines`] output; blank lines and `#` comments are skipped.
pub fn from_hex_lines(text: &str) -> Result<Vec<BlePacket>> {
    let mut packets = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: String| Error::Parse {
            line: n as u64 + 1,
            reason,
        };
        if line.len() % 2 != 0 || !line.is_ascii() {
            return Err(bad("odd-length or non-ascii hex".into()));
        }
        let bytes = (0..line.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&line[i..i + 2], 16))
            .collect::<std::result::Result<Vec<u8>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        packets.push(BlePacket::from_bytes(&bytes).map_err(|e| bad(e.to_string()))?);
    }
    Ok(packets)
}
