//! Short-range collaboration: BLE broadcast codec, time-multiplexed slots,
//! similarity clustering, cluster-head rotation and spatially compressed
//! uplink payloads.

mod cas;
mod cluster;
mod crc;
mod packet;
mod slot;
mod uplink;

pub use cas::{cas_step, elect_head, BatteryReport, CasController, CasPhase, HandoverMessage};
pub use cluster::{form_clusters, ClusterParams, ClusterState, NodeReport};
pub use crc::crc16;
pub use packet::{
    decode_broadcast, encode_broadcast, from_hex_lines, to_hex_lines, BlePacket, Broadcast,
    PacketEvent, BROADCAST_PACKETS, HEADER_LEN, MAGIC, NO_EVENT_TIME, PACKET_LEN, PAYLOAD_LEN,
};
pub use slot::{broadcast_slot_delay, SlotSchedule};
pub use uplink::{spatial_compress, MemberEntry, UplinkPayload};
