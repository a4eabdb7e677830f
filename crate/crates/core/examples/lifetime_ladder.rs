//! The five-rung lifetime ladder, simulated in parallel.

use isa_mesh::figures::lifetime_ladder;

fn main() -> isa_mesh::Result<()> {
    let table = lifetime_ladder()?;
    print!("{}", table.to_csv_string()?);
    Ok(())
}
