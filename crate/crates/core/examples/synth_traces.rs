//! Generate a three-channel synthetic trace and write it as CSV.

use isa_mesh::trace::{generate, serialize, AnomalySpec, ChannelBaseline, SynthSpec, TraceSet};
use isa_mesh::Channel;

fn main() -> isa_mesh::Result<()> {
    let spec = SynthSpec {
        channels: vec![
            ChannelBaseline {
                channel: Channel::Temperature,
                baseline: 20.0,
            },
            ChannelBaseline {
                channel: Channel::Humidity,
                baseline: 50.0,
            },
            ChannelBaseline {
                channel: Channel::Nitrate,
                baseline: 300.0,
            },
        ],
        noise: 0.002,
        anomalies: vec![AnomalySpec {
            start_s: 10.0,
            duration_s: 5.0,
            rise_s: 1.0,
            magnitude: 0.25,
            recovery_tau_s: 4.0,
        }],
        duration_s: 30.0,
        sample_period_s: 1.0,
        seed: 3,
    };
    let mut set = TraceSet::new();
    for t in generate(&spec)? {
        set.insert(t);
    }
    serialize(std::io::stdout().lock(), set.iter())
}
