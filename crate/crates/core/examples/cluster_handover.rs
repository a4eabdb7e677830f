//! Form clusters from anomaly histories, then rotate the head by battery.

use isa_mesh::isa::AnomalyEvent;
use isa_mesh::protocol::{form_clusters, BatteryReport, CasController, ClusterParams, NodeReport};
use isa_mesh::Channel;

fn event(node: u32, t: f64) -> AnomalyEvent {
    AnomalyEvent {
        node_id: node,
        channel: Channel::Temperature,
        value_before: 20.0,
        anomaly_time: t,
        value_after: 23.0,
    }
}

fn main() -> isa_mesh::Result<()> {
    let reports: Vec<NodeReport> = (0..5)
        .map(|i| NodeReport {
            node_id: i,
            position: (2.0 * f64::from(i), 0.0),
            history: vec![event(i, if i < 3 { 100.0 } else { 400.0 })],
        })
        .collect();
    let clusters = form_clusters(&reports, &ClusterParams::default(), 900.0)?;
    for c in &clusters {
        println!("cluster {:?} head {}", c.members, c.head);
    }
    let mut cas = CasController::new(clusters[0].clone());
    let batteries = [(0, 400.0), (1, 700.0), (2, 650.0)].map(|(id, q)| BatteryReport {
        node_id: id,
        charge_remaining: q,
        reported_at: 950.0,
    });
    if let Some(msg) = cas.evaluate(&batteries, 950.0) {
        println!("head {} hands over to {}", msg.from, msg.next_head);
        cas.acknowledge(msg.next_head);
    }
    println!("head is now {}", cas.head());
    Ok(())
}
