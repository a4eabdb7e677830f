//! Duty cycling saves energy by discarding samples.

use isa_mesh::energy::{duty_cycle_energy, info_loss, DutyCycleParams};

fn main() -> isa_mesh::Result<()> {
    let every = duty_cycle_energy(&DutyCycleParams::lora_reference(1.0))?;
    println!("period_s  energy_J  saving  info_loss");
    for n in [1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 900.0] {
        let e = duty_cycle_energy(&DutyCycleParams::lora_reference(n))?;
        println!(
            "{n:>8} {e:>9.3} {:>6.1}x {:>9.3}",
            every / e,
            info_loss(n, 1.0)?
        );
    }
    Ok(())
}
