use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::isa::AnomalyEvent;
use crate::trace::Channel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    /// BLE reach in meters.
    pub ble_range: f64,
    /// Largest anomaly time offset, in seconds, for two events to match.
    pub tau: f64,
    /// Largest relative value difference for two events to match.
    pub delta: f64,
    /// Length of the history window compared, in seconds.
    pub window: f64,
    /// Head plus members.
    pub max_members: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            ble_range: 10.0,
            tau: 5.0,
            delta: 0.02,
            window: 900.0,
            max_members: 8,
        }
    }
}

/// A node's position and its anomaly events inside the similarity window.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeReport {
    pub node_id: u32,
    pub position: (f64, f64),
    pub history: Vec<AnomalyEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    /// Sorted member ids, head included.
    pub members: Vec<u32>,
    pub head: u32,
    pub formed_at: f64,
    pub similarity_window: f64,
}

impl ClusterState {
    /// A cluster headed by its lowest id.
    pub fn new(mut members: Vec<u32>, formed_at: f64, similarity_window: f64) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        let head = *members
            .first()
            .ok_or_else(|| Error::invalid("members", "cluster cannot be empty"))?;
        Ok(Self {
            members,
            head,
            formed_at,
            similarity_window,
        })
    }

    pub fn contains(&self, id: u32) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members other than the head.
    pub fn followers(&self) -> impl Iterator<Item = u32> + '_ {
        self.members
            .iter()
            .copied()
            .filter(move |&m| m != self.head)
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn channel_events(history: &[AnomalyEvent], channel: Channel) -> Vec<&AnomalyEvent> {
    let mut v: Vec<_> = history.iter().filter(|e| e.channel == channel).collect();
    v.sort_by(|a, b| a.anomaly_time.total_cmp(&b.anomaly_time));
    v
}

/// Whether two nodes belong together: in BLE reach and with matching
/// anomaly histories on every channel.
pub fn similar(a: &NodeReport, b: &NodeReport, p: &ClusterParams) -> bool {
    let (dx, dy) = (a.position.0 - b.position.0, a.position.1 - b.position.1);
    if dx.hypot(dy) > p.ble_range {
        return false;
    }
    Channel::ALL.iter().all(|&ch| {
        let ea = channel_events(&a.history, ch);
        let eb = channel_events(&b.history, ch);
        ea.len() == eb.len()
            && ea.iter().zip(&eb).all(|(x, y)| {
                (x.anomaly_time - y.anomaly_time).abs() <= p.tau
                    && relative_gap(x.value_before, y.value_before) <= p.delta
                    && relative_gap(x.value_after, y.value_after) <= p.delta
            })
    })
}

/// Groups nodes into clusters of similar nodes.
///
/// Clusters are the connected components of the similarity graph, taken in
/// order of their lowest id. A component larger than `max_members` is split
/// by repeated breadth-first growth from its lowest unassigned id.
pub fn form_clusters(
    reports: &[NodeReport],
    params: &ClusterParams,
    formed_at: f64,
) -> Result<Vec<ClusterState>> {
    if params.max_members == 0 {
        return Err(Error::invalid("max_members", "must be at least 1"));
    }
    let mut by_id: BTreeMap<u32, &NodeReport> = BTreeMap::new();
    for r in reports {
        if by_id.insert(r.node_id, r).is_some() {
            return Err(Error::invalid(
                "reports",
                format!("node {} reported twice", r.node_id),
            ));
        }
    }
    let nodes: Vec<&NodeReport> = by_id.into_values().collect();
    let n = nodes.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if similar(nodes[i], nodes[j], params) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }

    let mut component = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let c = components.len();
        let mut members = vec![start];
        component[start] = c;
        let mut k = 0;
        while k < members.len() {
            for &j in &adj[members[k]] {
                if component[j] == usize::MAX {
                    component[j] = c;
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        components.push(members);
    }

    let mut assigned = vec![false; n];
    let mut clusters = Vec::new();
    for members in components {
        for &seed in &members {
            if assigned[seed] {
                continue;
            }
            let mut group = vec![seed];
            assigned[seed] = true;
            let mut queue = VecDeque::from([seed]);
            'grow: while let Some(i) = queue.pop_front() {
                for &j in &adj[i] {
                    if group.len() == params.max_members {
                        break 'grow;
                    }
                    if !assigned[j] {
                        assigned[j] = true;
                        group.push(j);
                        queue.push_back(j);
                    }
                }
            }
            let ids = group.iter().map(|&i| nodes[i].node_id).collect();
            clusters.push(ClusterState::new(ids, formed_at, params.window)?);
        }
    }
    Ok(clusters)
}
