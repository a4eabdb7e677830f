//! Closed-form cluster lifetimes against one simulated cluster.

use isa_mesh::energy::{
    network_lifetime_ci, network_lifetime_ci_cas, network_lifetime_no_ci, CiEnergyParams,
};
use isa_mesh::sim::{lifetime_crosscheck, rung_config, Mode};

fn main() -> isa_mesh::Result<()> {
    println!(" n  ci/base  ci_cas/base");
    for n in [1, 2, 4, 8, 16] {
        let p = CiEnergyParams::reference(n);
        let base = network_lifetime_no_ci(&p, 1800.0)?;
        println!(
            "{n:>2} {:>8.3} {:>12.3}",
            network_lifetime_ci(&p, 1800.0)? / base,
            network_lifetime_ci_cas(&p, 1800.0)? / base
        );
    }
    for mode in [Mode::IsaCi, Mode::IsaCiCas] {
        let c = rung_config(mode).with_line(4, 1.0);
        let x = lifetime_crosscheck(&c)?;
        println!(
            "{mode} n=4: simulated {:.2} d, closed form {:.2} d ({:.2}% apart)",
            x.simulated / 86_400.0,
            x.closed_form / 86_400.0,
            x.relative_error * 100.0
        );
    }
    Ok(())
}
