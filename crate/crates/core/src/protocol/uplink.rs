//! Cluster uplink payloads and their LoRa framing.
//!
//! ```text
//! frame   head u8 | index u8 | count u8 | members u8 | member* | block*
//! member  node_id u8 | battery u48 (uAh)
//! block   channel u8 | samples u8 | (timestamp u32 s, value f32)*
//! ```
//!
//! Members are listed in the first frame only. Multi-byte fields are
//! little-endian.

use std::collections::BTreeMap;

use log::{debug, warn};

use super::cas::BatteryReport;
use super::cluster::ClusterState;
use crate::error::{Error, Result};
use crate::isa::CompressedSeries;
use crate::trace::{Channel, SensorSample};
use crate::units::COULOMBS_PER_UAH;

const FRAME_HEADER: usize = 4;
const MEMBER_LEN: usize = 7;
const BLOCK_HEADER: usize = 2;
const SAMPLE_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemberEntry {
    pub node_id: u32,
    pub battery_uah: u64,
}

/// What a head sends for its cluster: its own series stand in for every
/// member's.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkPayload {
    pub head: u32,
    pub members: Vec<MemberEntry>,
    pub series: Vec<CompressedSeries>,
}

fn id_byte(id: u32) -> Result<u8> {
    u8::try_from(id).map_err(|_| Error::invalid("node_id", format!("{id} exceeds one byte")))
}

impl UplinkPayload {
    pub fn sample_count(&self) -> usize {
        self.series.iter().map(|s| s.kept.len()).sum()
    }

    /// Splits the payload into frames of at most `max_bytes`.
    pub fn to_frames(&self, max_bytes: usize) -> Result<Vec<Vec<u8>>> {
        let first_min = FRAME_HEADER + MEMBER_LEN * self.members.len();
        if max_bytes < FRAME_HEADER + BLOCK_HEADER + SAMPLE_LEN || first_min > max_bytes {
            return Err(Error::invalid(
                "payload_bytes",
                format!("{max_bytes} bytes cannot hold the frame header and member list"),
            ));
        }
        if self.members.len() > usize::from(u8::MAX) {
            return Err(Error::invalid("members", "more than 255 members"));
        }
        let head = id_byte(self.head)?;
        let new_frame = |index: usize| vec![head, index as u8, 0, 0];

        let mut frames = vec![new_frame(0)];
        let first = &mut frames[0];
        first[3] = self.members.len() as u8;
        for m in &self.members {
            first.push(id_byte(m.node_id)?);
            first.extend_from_slice(&m.battery_uah.min((1 << 48) - 1).to_le_bytes()[..6]);
        }
        for s in &self.series {
            let mut rest: &[SensorSample] = &s.kept;
            while !rest.is_empty() {
                let room = max_bytes - frames.last().unwrap().len();
                if room < BLOCK_HEADER + SAMPLE_LEN {
                    let idx = frames.len();
                    frames.push(new_frame(idx));
                    continue;
                }
                let n = ((room - BLOCK_HEADER) / SAMPLE_LEN)
                    .min(rest.len())
                    .min(255);
                let frame = frames.last_mut().unwrap();
                frame.push(s.channel.index());
                frame.push(n as u8);
                for sample in &rest[..n] {
                    let t = sample.timestamp.round();
                    if !(0.0..=f64::from(u32::MAX)).contains(&t) {
                        return Err(Error::invalid("timestamp", format!("{t} s")));
                    }
                    frame.extend_from_slice(&(t as u32).to_le_bytes());
                    frame.extend_from_slice(&(sample.value as f32).to_le_bytes());
                }
                rest = &rest[n..];
            }
        }
        let count = u8::try_from(frames.len())
            .map_err(|_| Error::invalid("payload", "more than 255 frames"))?;
        for f in &mut frames {
            f[2] = count;
        }
        Ok(frames)
    }

    /// Reassembles frames. Sample timestamps come back as whole seconds and
    /// values as `f32` precision.
    pub fn from_frames(frames: &[Vec<u8>]) -> Result<Self> {
        let bad = |r: &str| Error::Packet(format!("uplink frame: {r}"));
        let first = frames.first().ok_or_else(|| bad("no frames"))?;
        if first.len() < FRAME_HEADER {
            return Err(bad("truncated header"));
        }
        let head = first[0];
        let mut members = Vec::new();
        let mut per_channel: BTreeMap<Channel, Vec<SensorSample>> = BTreeMap::new();
        for (i, f) in frames.iter().enumerate() {
            if f.len() < FRAME_HEADER
                || f[0] != head
                || usize::from(f[1]) != i
                || usize::from(f[2]) != frames.len()
            {
                return Err(bad("inconsistent frame header"));
            }
            if i > 0 && f[3] != 0 {
                return Err(bad("member list outside the first frame"));
            }
            let mut pos = FRAME_HEADER;
            for _ in 0..f[3] {
                let m = f
                    .get(pos..pos + MEMBER_LEN)
                    .ok_or_else(|| bad("truncated member"))?;
                let mut battery = [0u8; 8];
                battery[..6].copy_from_slice(&m[1..]);
                members.push(MemberEntry {
                    node_id: u32::from(m[0]),
                    battery_uah: u64::from_le_bytes(battery),
                });
                pos += MEMBER_LEN;
            }
            while pos < f.len() {
                let h = f
                    .get(pos..pos + BLOCK_HEADER)
                    .ok_or_else(|| bad("truncated block"))?;
                let channel = Channel::from_index(h[0]).ok_or_else(|| bad("unknown channel"))?;
                let n = usize::from(h[1]);
                pos += BLOCK_HEADER;
                let body = f
                    .get(pos..pos + n * SAMPLE_LEN)
                    .ok_or_else(|| bad("truncated samples"))?;
                let samples = per_channel.entry(channel).or_default();
                for chunk in body.chunks_exact(SAMPLE_LEN) {
                    let t = u32::from_le_bytes(chunk[..4].try_into().unwrap());
                    let v = f32::from_le_bytes(chunk[4..].try_into().unwrap());
                    samples.push(SensorSample::new(f64::from(t), f64::from(v), channel));
                }
                pos += n * SAMPLE_LEN;
            }
        }
        let series = per_channel
            .into_iter()
            .map(|(channel, kept)| CompressedSeries {
                channel,
                source_count: kept.len(),
                kept,
                threshold_y: f64::NAN,
            })
            .collect();
        Ok(Self {
            head: u32::from(head),
            members,
            series,
        })
    }
}

/// Builds the cluster uplink: the head's own series plus every member's id
/// and latest battery. Member series are redundant and dropped.
pub fn spatial_compress(
    cluster: &ClusterState,
    member_series: &BTreeMap<u32, Vec<CompressedSeries>>,
    latest: &[BatteryReport],
) -> UplinkPayload {
    let series = member_series
        .get(&cluster.head)
        .cloned()
        .unwrap_or_else(|| {
            warn!("head {} has no series for the uplink", cluster.head);
            Vec::new()
        });
    let members = cluster
        .members
        .iter()
        .filter_map(|&id| {
            let report = latest
                .iter()
                .filter(|r| r.node_id == id)
                .max_by(|a, b| a.reported_at.total_cmp(&b.reported_at));
            match report {
                Some(r) => Some(MemberEntry {
                    node_id: id,
                    battery_uah: (r.charge_remaining.max(0.0) / COULOMBS_PER_UAH).round() as u64,
                }),
                None => {
                    debug!("member {id} has no battery report for the uplink");
                    None
                }
            }
        })
        .collect();
    UplinkPayload {
        head: cluster.head,
        members,
        series,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(channel: Channel, n: usize) -> CompressedSeries {
        CompressedSeries {
            channel,
            kept: (0..n)
                .map(|i| SensorSample::new(i as f64, 20.0 + i as f64 * 0.5, channel))
                .collect(),
            source_count: 10 * n,
            threshold_y: 0.02,
        }
    }

    fn rep(id: u32) -> BatteryReport {
        BatteryReport {
            node_id: id,
            charge_remaining: 100.0 + f64::from(id),
            reported_at: 0.0,
        }
    }

    #[test]
    fn one_series_for_the_whole_cluster() {
        let cluster = ClusterState::new(vec![0, 1, 2, 3], 0.0, 900.0).unwrap();
        let all: BTreeMap<_, _> = (0..4)
            .map(|i| (i, vec![series(Channel::Temperature, 3)]))
            .collect();
        let reports: Vec<_> = (0..4).map(rep).collect();
        let p = spatial_compress(&cluster, &all, &reports);
        assert_eq!(p.series.len(), 1);
        assert_eq!(p.members.len(), 4);
        assert_eq!(p.sample_count(), 3);
    }

    #[test]
    fn singleton_sends_own_series() {
        let cluster = ClusterState::new(vec![5], 0.0, 900.0).unwrap();
        let own = vec![series(Channel::Nitrate, 2)];
        let map = BTreeMap::from([(5, own.clone())]);
        let p = spatial_compress(&cluster, &map, &[rep(5)]);
        assert_eq!(p.series, own);
    }

    #[test]
    fn frames_respect_limit_and_round_trip() {
        let p = UplinkPayload {
            head: 2,
            members: (0..8)
                .map(|i| MemberEntry {
                    node_id: i,
                    battery_uah: 1000 * u64::from(i),
                })
                .collect(),
            series: vec![
                series(Channel::Temperature, 40),
                series(Channel::Humidity, 7),
            ],
        };
        let frames = p.to_frames(240).unwrap();
        assert!(frames.len() > 1);
        assert!(frames.iter().all(|f| f.len() <= 240));
        let back = UplinkPayload::from_frames(&frames).unwrap();
        assert_eq!(back.head, 2);
        assert_eq!(back.members, p.members);
        for (a, b) in back.series.iter().zip(&p.series) {
            assert_eq!(a.channel, b.channel);
            assert_eq!(a.kept, b.kept);
        }
        assert!(p.to_frames(30).is_err());
    }

    #[test]
    fn small_payload_fits_one_frame() {
        let p = UplinkPayload {
            head: 0,
            members: vec![MemberEntry {
                node_id: 0,
                battery_uah: 5,
            }],
            series: vec![series(Channel::Temperature, 3)],
        };
        let frames = p.to_frames(240).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(
            frames[0].len(),
            FRAME_HEADER + MEMBER_LEN + BLOCK_HEADER + 3 * SAMPLE_LEN
        );
    }
}
