//! Route an uplink over relays and compare the ledger to the analytic
//! multi-hop benefit.

use isa_mesh::energy::multihop_benefit;
use isa_mesh::sim::{route_multihop, run_scenario, LoraCost, Mode, ScenarioConfig, Workload};

fn per_bit(sf: u8, relays: Vec<(f64, f64)>) -> isa_mesh::Result<f64> {
    let mut c = ScenarioConfig::default().with_line(1, 1.0);
    c.mode = Mode::Isa;
    c.workload = Workload::SquareWave;
    c.lora.spreading_factor = sf;
    c.lora_cost = LoraCost::Airtime;
    c.hub = (2000.0, 0.0);
    c.relays = relays;
    c.duration = 86_400.0;
    let r = run_scenario(&c)?;
    Ok(r.lora_energy_per_bit().expect("frames delivered"))
}

fn main() -> isa_mesh::Result<()> {
    let relays = [(1, (1200.0, 0.0)), (2, (2400.0, 0.0))];
    let chain = route_multihop((0.0, 0.0), (3500.0, 0.0), &relays, 1249.0);
    println!("relay chain to 3.5 km at SF7: {chain:?}");
    let two_hops = per_bit(7, vec![(1000.0, 0.0)])?;
    let one_hop = per_bit(10, vec![])?;
    println!(
        "simulated SF10 / 2xSF7 energy per bit: {:.3}",
        one_hop / two_hops
    );
    println!(
        "analytic: {:.3}",
        multihop_benefit(10, 7, 2, &Default::default())?
    );
    Ok(())
}
