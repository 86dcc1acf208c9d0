//! Escape rates across regimes, with the limiting forms and the direct
//! golden-rule quadrature alongside.

use magtrap::field::derive_frequencies;
use magtrap::quantum::{asymptotic_rate, escape_rate, golden_rule_log_rate, Regime};
use magtrap::{DerivedFrequencies, ParticleSpec, TrapConfig};

fn main() -> magtrap::Result<()> {
    println!("{:>8} {:>8} {:>14} {:>14}  regime", "K_r", "K_z", "log10 T_esc", "line");
    for (kr, kz) in [(0.01, 0.01), (0.02, 1e-4), (1e-4, 0.02), (0.05, 0.02)] {
        let f = DerivedFrequencies::from_omegas(1.0, kr, kz)?;
        let r = escape_rate(&f)?;
        let line = match r.regime {
            Regime::General => String::from("-"),
            regime => format!("{:.6e}", -asymptotic_rate(&f, regime)?.log_rate / std::f64::consts::LN_10),
        };
        println!("{kr:>8} {kz:>8} {:>14.6e} {line:>14}  {}", r.log10_t_esc, r.regime.as_str());
    }

    let p = ParticleSpec::dimensionless();
    let cfg = TrapConfig::from_frequencies(&p, 1.0, 0.05, 0.03)?;
    let closed = escape_rate(&derive_frequencies(&cfg, &p)?)?;
    let direct = golden_rule_log_rate(&cfg, &p)?;
    println!(
        "ln rate: closed form {:.12}, golden rule {:.12} ({} evaluations)",
        closed.log_rate, direct.log_rate, direct.evaluations
    );
    Ok(())
}
