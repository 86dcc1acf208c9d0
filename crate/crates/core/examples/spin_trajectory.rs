//! Classical motion about the two equilibria of a dimensionless trap.

use magtrap::dynamics::{integrate, standard_perturbation, ClassicalState};
use magtrap::field::derive_frequencies;
use magtrap::{ParticleSpec, TrapConfig};

fn main() -> magtrap::Result<()> {
    let p = ParticleSpec::dimensionless();
    let cfg = TrapConfig::from_frequencies(&p, 1.0, 0.1, 0.08)?;
    let f = derive_frequencies(&cfg, &p)?;
    let dpos = standard_perturbation(&cfg, &p, 1e-3)?;

    let anti = ClassicalState::antiparallel_equilibrium().displaced(dpos);
    let traj = integrate(&cfg, &p, &anti, 20.0 * std::f64::consts::TAU / f.omega_r, 1e-10)?;
    let s = traj.summary();
    println!(
        "antiparallel: {} steps, excursion {:.3}x initial, energy drift {:.2e}",
        s.steps,
        s.max_excursion / s.initial_displacement,
        s.energy_drift
    );

    let par = ClassicalState::parallel_equilibrium().displaced(dpos);
    let traj = integrate(&cfg, &p, &par, 5.0 / f.omega_z, 1e-10)?;
    let s = traj.summary();
    println!(
        "parallel: excursion {:.1}x initial, unbounded = {}",
        s.max_excursion / s.initial_displacement,
        s.unbounded
    );
    let end = traj.last();
    println!("final position {:.3e} {:.3e} {:.3e}", end.pos.x, end.pos.y, end.pos.z);
    Ok(())
}
