//! Encode an anomaly broadcast into three BLE packets and decode it back.

use isa_mesh::isa::AnomalyEvent;
use isa_mesh::protocol::{
    broadcast_slot_delay, decode_broadcast, encode_broadcast, to_hex_lines, BatteryReport,
};
use isa_mesh::Channel;

fn main() -> isa_mesh::Result<()> {
    let event = AnomalyEvent {
        node_id: 5,
        channel: Channel::Nitrate,
        value_before: 300.0,
        anomaly_time: 5400.0,
        value_after: 352.0,
    };
    let battery = BatteryReport {
        node_id: 5,
        charge_remaining: 612.5,
        reported_at: 5400.0,
    };
    let packets = encode_broadcast(&[event], &battery, 7)?;
    print!("{}", to_hex_lines(&packets));
    let back = decode_broadcast(&packets, 5400.1)?;
    println!(
        "decoded {} event(s), battery {:.3} C",
        back.events.len(),
        back.battery.charge_remaining
    );
    println!(
        "node 5 transmits {:.0} ms after the event",
        broadcast_slot_delay(5)? * 1e3
    );
    Ok(())
}
