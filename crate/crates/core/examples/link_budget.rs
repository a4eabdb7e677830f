//! Range, packet size and energy per bit for every spreading factor, plus
//! the payoff of splitting one long SF10 link into two SF7 hops.

use isa_mesh::energy::{
    lora_energy_per_bit, lora_packet_bytes, lora_range, min_comm_energy, multihop_benefit,
    LinkParams, LoRaParams, ReceiverParams,
};

fn main() -> isa_mesh::Result<()> {
    let link = LinkParams::lora_reference();
    let rx = ReceiverParams::lora_reference();
    println!("sf  range_m  packet_B  uJ/bit");
    for sf in 7..=12 {
        let p = LoRaParams::default().with_sf(sf);
        println!(
            "{sf:>2} {:>8.0} {:>9.2} {:>7.2}",
            lora_range(&p, &link, &rx)?,
            lora_packet_bytes(&p)?,
            lora_energy_per_bit(&p)? * 1e6
        );
    }
    let benefit = multihop_benefit(10, 7, 2, &LoRaParams::default())?;
    println!("two SF7 hops instead of one SF10 hop: {benefit:.2}x less energy per bit");
    let floor = min_comm_energy(&link.with_distance(1000.0), &rx)?;
    println!("physical floor at 1 km: {floor:.3e} J/bit");
    Ok(())
}
