//! Pick anomaly and compression thresholds from a history of one channel.

use isa_mesh::isa::calibrate_thresholds;
use isa_mesh::trace::{generate, AnomalySpec, ChannelBaseline, SynthSpec};
use isa_mesh::Channel;

fn main() -> isa_mesh::Result<()> {
    let spec = SynthSpec {
        channels: vec![ChannelBaseline {
            channel: Channel::Humidity,
            baseline: 50.0,
        }],
        noise: 0.01,
        anomalies: (0..6)
            .map(|i| AnomalySpec {
                start_s: 300.0 + 600.0 * f64::from(i),
                duration_s: 60.0,
                rise_s: 2.0,
                magnitude: 0.2,
                recovery_tau_s: 5.0,
            })
            .collect(),
        duration_s: 3600.0,
        sample_period_s: 1.0,
        seed: 11,
    };
    let history = &generate(&spec)?[0];
    let t = calibrate_thresholds(history, 3, 5)?;
    println!(
        "anomaly x = {:.4}, compression y = {:.4}",
        t.anomaly_x, t.compress_y
    );
    Ok(())
}
