//! Time scales of a trap with B0 = 100 Oe and ~10 cm length scales.

use magtrap::cli::table_rows;
use magtrap::{ParticleSpec, TrapConfig};

fn main() -> magtrap::Result<()> {
    for r in table_rows(&TrapConfig::table1(), &ParticleSpec::table1())? {
        println!("{:<12} {:<8} {:>12.4e}  ~{:.0e}  {}", r.quantity, r.unit, r.value, r.expected, r.matches);
    }
    Ok(())
}
