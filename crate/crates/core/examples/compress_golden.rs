//! Compress the golden temperature trace and sweep the threshold.

use isa_mesh::figures::{compression_tradeoff, grid};
use isa_mesh::isa::{compress, detect_anomaly, fidelity_metrics};
use isa_mesh::trace::fixtures;

fn main() -> isa_mesh::Result<()> {
    let trace = fixtures::golden_trace()?;
    for e in detect_anomaly(0, &trace, 0.10)? {
        println!(
            "anomaly at t={} s: {:.3} -> {:.3}",
            e.anomaly_time, e.value_before, e.value_after
        );
    }
    let c = compress(&trace, 0.02)?;
    let m = fidelity_metrics(&trace, &c)?;
    println!(
        "y=0.02 keeps {} of {} samples, ratio {:.2}, correlation {:.4}",
        c.kept.len(),
        trace.len(),
        m.compression_ratio,
        m.correlation.value().unwrap_or(1.0)
    );
    let table = compression_tradeoff(&trace, &grid(0.005, 0.05, 0.005)?)?;
    print!("{}", table.to_csv_string()?);
    Ok(())
}
