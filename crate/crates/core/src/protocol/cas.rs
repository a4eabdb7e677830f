use std::collections::BTreeMap;

use log::debug;

use super::cluster::ClusterState;

/// A node's remaining charge as last heard by the cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryReport {
    pub node_id: u32,
    /// Coulombs.
    pub charge_remaining: f64,
    /// Seconds.
    pub reported_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HandoverMessage {
    pub from: u32,
    pub next_head: u32,
}

/// Latest report per member; among duplicates the newest wins.
fn latest_by_member(
    cluster: &ClusterState,
    latest: &[BatteryReport],
) -> BTreeMap<u32, BatteryReport> {
    let mut map: BTreeMap<u32, BatteryReport> = BTreeMap::new();
    for r in latest.iter().filter(|r| cluster.contains(r.node_id)) {
        let newer = map.get(&r.node_id).is_none_or(|old| {
            (r.reported_at, r.charge_remaining) > (old.reported_at, old.charge_remaining)
        });
        if newer {
            map.insert(r.node_id, *r);
        }
    }
    map
}

/// The member with the most remaining charge; ties go to the lowest id.
/// Members without a report are not candidates.
pub fn elect_head(cluster: &ClusterState, latest: &[BatteryReport]) -> Option<u32> {
    let map = latest_by_member(cluster, latest);
    for &m in &cluster.members {
        if !map.contains_key(&m) {
            debug!("node {m} has no battery report and cannot be elected");
        }
    }
    let mut best: Option<&BatteryReport> = None;
    for r in map.values() {
        if best.is_none_or(|b| r.charge_remaining > b.charge_remaining) {
            best = Some(r);
        }
    }
    best.map(|r| r.node_id)
}

/// Proposes a handover when some member holds strictly more charge than the
/// current head.
pub fn cas_step(cluster: &ClusterState, latest: &[BatteryReport]) -> Option<HandoverMessage> {
    let next = elect_head(cluster, latest)?;
    if next == cluster.head {
        return None;
    }
    let map = latest_by_member(cluster, latest);
    let switch = match map.get(&cluster.head) {
        Some(h) => h.charge_remaining < map[&next].charge_remaining,
        None => true,
    };
    switch.then_some(HandoverMessage {
        from: cluster.head,
        next_head: next,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CasPhase {
    Stable,
    /// Announced but not yet acknowledged; the old head keeps the role.
    Handover {
        next_head: u32,
        announced_at: f64,
    },
}

/// Two-phase head rotation for one cluster: announce, then transfer on the
/// new head's acknowledgement.
#[derive(Debug, Clone, PartialEq)]
pub struct CasController {
    cluster: ClusterState,
    phase: CasPhase,
}

impl CasController {
    pub fn new(cluster: ClusterState) -> Self {
        Self {
            cluster,
            phase: CasPhase::Stable,
        }
    }

    pub fn cluster(&self) -> &ClusterState {
        &self.cluster
    }

    pub fn head(&self) -> u32 {
        self.cluster.head
    }

    pub fn phase(&self) -> CasPhase {
        self.phase
    }

    /// Runs [`cas_step`] when no handover is in flight.
    pub fn evaluate(&mut self, latest: &[BatteryReport], now: f64) -> Option<HandoverMessage> {
        if self.phase != CasPhase::Stable {
            return None;
        }
        let msg = cas_step(&self.cluster, latest)?;
        self.phase = CasPhase::Handover {
            next_head: msg.next_head,
            announced_at: now,
        };
        Some(msg)
    }

    /// Completes a pending handover if `node` is the announced successor.
    pub fn acknowledge(&mut self, node: u32) -> bool {
        match self.phase {
            CasPhase::Handover { next_head, .. } if next_head == node => {
                self.cluster.head = node;
                self.phase = CasPhase::Stable;
                true
            }
            _ => false,
        }
    }

    /// Drops a dead member. A dead head is replaced at once by the best
    /// reported member (lowest id without reports); a dead successor
    /// cancels the pending handover. Returns the new head if it changed.
    pub fn remove_member(&mut self, node: u32, latest: &[BatteryReport]) -> Option<u32> {
        let Ok(pos) = self.cluster.members.binary_search(&node) else {
            return None;
        };
        self.cluster.members.remove(pos);
        if let CasPhase::Handover { next_head, .. } = self.phase {
            if next_head == node {
                self.phase = CasPhase::Stable;
            }
        }
        if node != self.cluster.head || self.cluster.members.is_empty() {
            return None;
        }
        self.phase = CasPhase::Stable;
        let next = elect_head(&self.cluster, latest).unwrap_or(self.cluster.members[0]);
        self.cluster.head = next;
        Some(next)
    }
}
