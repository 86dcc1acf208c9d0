//! Escape rate of the trapped ground state.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{LN_10, PI};

use super::integrals::{log_i_integral, log_j, log_j_quadrature};
use super::states::{log_matrix_element_sq_parts, trap_wavenumber, ContinuumState, NominalBox};
use crate::error::{Error, Result};
use crate::field::{derive_frequencies, DerivedFrequencies, ParticleSpec, TrapConfig};
use crate::quadrature::{integrate, QuadOptions};

/// Relative anisotropy below which a trap is treated as isotropic.
pub const ISOTROPY_TOL: f64 = 0.01;
/// Frequency ratio beyond which one direction dominates.
pub const DOMINANCE_RATIO: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Isotropic,
    RadialDominated,
    AxialDominated,
    General,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Isotropic => "isotropic",
            Regime::RadialDominated => "radial-dominated",
            Regime::AxialDominated => "axial-dominated",
            Regime::General => "general",
        }
    }
}

pub fn classify_regime(f: &DerivedFrequencies) -> Regime {
    let ratio = f.omega_r / f.omega_z;
    if (ratio - 1.0).abs() < ISOTROPY_TOL {
        Regime::Isotropic
    } else if ratio > DOMINANCE_RATIO {
        Regime::RadialDominated
    } else if ratio < 1.0 / DOMINANCE_RATIO {
        Regime::AxialDominated
    } else {
        Regime::General
    }
}

/// `ln[2√(2π)(2ω_r² + ω_z²)√ω_p/(ω_r√ω_z)]`.
pub fn log_prefactor(f: &DerivedFrequencies) -> f64 {
    (2.0 * (2.0 * PI).sqrt()).ln() + (2.0 * f.omega_r * f.omega_r + f.omega_z * f.omega_z).ln() + 0.5 * f.omega_p.ln()
        - f.omega_r.ln()
        - 0.5 * f.omega_z.ln()
}

/// `log10 T_esc` for a rate given as `ln(1/T_esc)`.
pub fn log10_t_esc(log_rate: f64) -> f64 {
    -log_rate / LN_10
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EscapeRateResult {
    /// `ln(1/T_esc)` with the rate in the units of the frequencies.
    pub log_rate: f64,
    pub log10_t_esc: f64,
    pub regime: Regime,
    /// Relative disagreement between the closed-form angular integral and
    /// an independent quadrature of it.
    pub quadrature_error: f64,
    pub k_r: f64,
    pub k_z: f64,
    /// Both adiabaticity parameters at most 0.1.
    pub adiabatic: bool,
}

fn check(f: &DerivedFrequencies) -> Result<()> {
    DerivedFrequencies::from_omegas(f.omega_p, f.omega_r, f.omega_z).map(|_| ())
}

/// Closed-form escape rate from the three frequencies.
pub fn escape_rate(f: &DerivedFrequencies) -> Result<EscapeRateResult> {
    check(f)?;
    let a = 2.0 * f.omega_p / f.omega_r;
    let b = 2.0 * f.omega_p / f.omega_z;
    let log_i = log_i_integral(a, b)?;
    let c = b - a;
    let (quad, quad_err) = log_j_quadrature(c)?;
    let log_rate = log_prefactor(f) + log_i;
    if !log_rate.is_finite() {
        return Err(Error::Quadrature(format!("escape rate is not finite for {f:?}")));
    }
    Ok(EscapeRateResult {
        log_rate,
        log10_t_esc: log10_t_esc(log_rate),
        regime: classify_regime(f),
        quadrature_error: (quad - log_j(c)).abs().max(quad_err),
        k_r: f.k_r,
        k_z: f.k_z,
        adiabatic: f.k_r <= 0.1 && f.k_z <= 0.1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticRate {
    pub log_rate: f64,
    pub regime: Regime,
    /// The frequencies are outside the range where this line applies.
    pub regime_mismatch: bool,
}

/// Limiting forms of the rate:
///
/// - isotropic: `8√(2π)√(ω_pω_i) e^{−2ω_p/ω_i}` with `ω_i = √(ω_rω_z)`
/// - radial-dominated: `4πω_r e^{−2ω_p/ω_r}`
/// - axial-dominated: `√(π/2) ω_r (ω_z/ω_p)^{3/2} e^{−2ω_p/ω_z}`
pub fn asymptotic_rate(f: &DerivedFrequencies, regime: Regime) -> Result<AsymptoticRate> {
    check(f)?;
    let (wp, wr, wz) = (f.omega_p, f.omega_r, f.omega_z);
    let log_rate = match regime {
        Regime::Isotropic => {
            let wi = (wr * wz).sqrt();
            (8.0 * (2.0 * PI).sqrt()).ln() + 0.5 * (wp * wi).ln() - 2.0 * wp / wi
        }
        Regime::RadialDominated => (4.0 * PI * wr).ln() - 2.0 * wp / wr,
        Regime::AxialDominated => (0.5 * PI).sqrt().ln() + wr.ln() + 1.5 * (wz / wp).ln() - 2.0 * wp / wz,
        Regime::General => return Err(Error::Domain("no asymptotic form for the general regime".into())),
    };
    let regime_mismatch = classify_regime(f) != regime || wp < DOMINANCE_RATIO * wr.max(wz);
    if regime_mismatch {
        log::warn!("asymptotic {} rate requested outside its regime", regime.as_str());
    }
    Ok(AsymptoticRate {
        log_rate,
        regime,
        regime_mismatch,
    })
}

/// Golden-rule rate assembled from the matrix element and density of
/// states, integrated over the emission angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GoldenRule {
    pub log_rate: f64,
    /// Angle at which `|H|²ρ` peaks, in `(0, π/2]`.
    pub peak_gamma: f64,
    /// Relative error estimate of the angular quadrature.
    pub quadrature_error: f64,
    pub evaluations: usize,
}

/// `ln(dN/(dE dγ) / (ZR))`, the box-free part of the density of states.
fn log_density_per_area(p: &ParticleSpec) -> f64 {
    (p.mass / (2.0 * PI * PI * p.spin * p.spin)).ln()
}

fn peak_and_width(f: &DerivedFrequencies, p: &ParticleSpec, cfg: &TrapConfig) -> (f64, f64) {
    // exponent of the integrand is 3 ln sinγ − a sin²γ − b cos²γ + const
    let k0 = trap_wavenumber(p, cfg);
    let scale = p.spin * k0 * k0 / p.mass;
    let (a, b) = (scale / f.omega_r, scale / f.omega_z);
    let curvature = 3.0 + 2.0 * (b - a);
    let peak = if a - b > 1.5 { (1.5 / (a - b)).sqrt().asin() } else { 0.5 * PI };
    (peak, 1.0 / (curvature.abs() + 1.0).sqrt())
}

/// Geometric breakpoints on `[0, π/2]` clustered around the peak.
fn breakpoints(peak: f64, width: f64) -> Vec<f64> {
    let half = 0.5 * PI;
    let mut pts = vec![0.0, peak, half];
    let mut step = 0.25 * width;
    while step < half {
        for x in [peak - step, peak + step] {
            if x > 0.0 && x < half {
                pts.push(x);
            }
        }
        step *= 2.0;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `log|H|²ρ = constant + remainder(γ)`, integrated with the remainder
/// shifted by its peak value.
fn golden_rule_with(
    p: &ParticleSpec,
    cfg: &TrapConfig,
    constant: f64,
    remainder: impl Fn(f64) -> f64,
) -> Result<GoldenRule> {
    let f = derive_frequencies(cfg, p)?;
    let (peak, width) = peak_and_width(&f, p, cfg);
    let shift = remainder(peak);
    if !(shift.is_finite() && constant.is_finite()) {
        return Err(Error::Quadrature(format!("golden-rule integrand is not finite at its peak ({shift})")));
    }
    let pts = breakpoints(peak, width);
    let opts = QuadOptions {
        abs_tol: 1e-17,
        rel_tol: 1e-13,
        max_intervals: 2000,
    };
    let mut total = 0.0;
    let mut err = 0.0;
    let mut evaluations = 0;
    for w in pts.windows(2) {
        let r = integrate(|g: f64| (remainder(g) - shift).exp(), w[0], w[1], opts)?;
        total += r.value;
        err += r.abs_error;
        evaluations += r.evaluations;
    }
    // the integrand is symmetric about π/2
    let log_rate = (2.0 * PI / p.spin).ln() + 2.0f64.ln() + constant + shift + total.ln();
    Ok(GoldenRule {
        log_rate,
        peak_gamma: peak,
        quadrature_error: err / total,
        evaluations,
    })
}

/// `ln(1/T_esc) = ln[(2π/ħ) ∫₀^π |H_i^γ|² ρ_γ dγ]` by direct quadrature of
/// the matrix element, independent of the closed-form reduction.
pub fn golden_rule_log_rate(cfg: &TrapConfig, p: &ParticleSpec) -> Result<GoldenRule> {
    let f = derive_frequencies(cfg, p)?;
    let (constant, _) = log_matrix_element_sq_parts(&f, p, cfg, 0.5 * PI);
    golden_rule_with(p, cfg, constant + log_density_per_area(p), |g| {
        log_matrix_element_sq_parts(&f, p, cfg, g).1
    })
}

/// The same rate with the box kept explicit: large-box normalisation of the
/// continuum states and the box density of states, so `R` and `Z` appear
/// and must cancel.
pub fn golden_rule_log_rate_in_box(cfg: &TrapConfig, p: &ParticleSpec, b: &NominalBox) -> Result<GoldenRule> {
    let f = derive_frequencies(cfg, p)?;
    let k0 = trap_wavenumber(p, cfg);
    let (constant, _) = log_matrix_element_sq_parts(&f, p, cfg, 0.5 * PI);
    // log_matrix_element_sq carries C² = k0 sinγ/2 per unit ZR; swap it for the box's own
    golden_rule_with(p, cfg, constant + b.density_of_states(p.mass, p.spin).ln(), |g| {
        let c2 = match ContinuumState::new(k0, g) {
            Ok(state) => state.c_gamma_sq_asymptotic(b),
            Err(_) => return f64::NEG_INFINITY,
        };
        log_matrix_element_sq_parts(&f, p, cfg, g).1 - (0.5 * k0 * g.sin()).ln() + c2.ln()
    })
}

/// One row of a rate sweep over the adiabaticity plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub k_r: f64,
    pub k_z: f64,
    pub omega_p: f64,
    pub log10_t_esc: f64,
    pub regime: Regime,
}

/// Rates on an `n × n` grid with `K_r` and `K_z` spaced logarithmically.
pub fn rate_sweep(omega_p: f64, k_r: (f64, f64), k_z: (f64, f64), n: usize) -> Result<Vec<SweepRow>> {
    if n == 0 {
        return Err(Error::Domain("sweep resolution must be at least 1".into()));
    }
    for (lo, hi) in [k_r, k_z] {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Domain(format!("sweep range must satisfy 0 < lo <= hi, got [{lo}, {hi}]")));
        }
    }
    let axis = |(lo, hi): (f64, f64), i: usize| {
        if n == 1 {
            lo
        } else {
            lo * (hi / lo).powf(i as f64 / (n - 1) as f64)
        }
    };
    (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (kr, kz) = (axis(k_r, idx % n), axis(k_z, idx / n));
            let f = DerivedFrequencies::from_omegas(omega_p, kr * omega_p, kz * omega_p)?;
            let r = escape_rate(&f)?;
            Ok(SweepRow {
                k_r: kr,
                k_z: kz,
                omega_p,
                log10_t_esc: r.log10_t_esc,
                regime: r.regime,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dimless(kr: f64, kz: f64) -> (TrapConfig, ParticleSpec, DerivedFrequencies) {
        let p = ParticleSpec::dimensionless();
        let c = TrapConfig::from_frequencies(&p, 1.0, kr, kz).unwrap();
        let f = derive_frequencies(&c, &p).unwrap();
        (c, p, f)
    }

    #[test]
    fn regimes() {
        let f = |r: f64, z: f64| DerivedFrequencies::from_omegas(1.0, r, z).unwrap();
        assert_eq!(classify_regime(&f(1.0, 1.005)), Regime::Isotropic);
        assert_eq!(classify_regime(&f(11.0, 1.0)), Regime::RadialDominated);
        assert_eq!(classify_regime(&f(1.0, 11.0)), Regime::AxialDominated);
        assert_eq!(classify_regime(&f(1.0, 3.0)), Regime::General);
        assert_eq!(serde_json::to_string(&Regime::RadialDominated).unwrap(), "\"radial-dominated\"");
    }

    #[test]
    fn isotropic_closed_form() {
        for ratio in [10.0, 1e3, 1e8] {
            let w = 1.0 / ratio;
            let f = DerivedFrequencies::from_omegas(1.0, w, w).unwrap();
            let r = escape_rate(&f).unwrap();
            let want = (8.0 * (2.0 * PI).sqrt()).ln() + 0.5 * w.ln() - 2.0 * ratio;
            assert!((r.log_rate - want).abs() <= 1e-12 * want.abs());
            let a = asymptotic_rate(&f, Regime::Isotropic).unwrap();
            assert!((a.log_rate - want).abs() <= 1e-12 * want.abs());
        }
    }

    #[test]
    fn golden_rule_matches_closed_form() {
        for &(kr, kz) in &[(0.2, 0.15), (0.05, 0.3), (0.01, 0.002), (0.002, 0.01), (0.03, 0.03)] {
            let (c, p, f) = dimless(kr, kz);
            let closed = escape_rate(&f).unwrap().log_rate;
            let g = golden_rule_log_rate(&c, &p).unwrap();
            assert!(g.quadrature_error < 1e-12);
            assert!((g.log_rate - closed).abs() <= 1e-10 * closed.abs().max(1.0), "{kr},{kz}: {} vs {closed}", g.log_rate);
        }
    }

    #[test]
    fn golden_rule_table1() {
        let (c, p) = (TrapConfig::table1(), ParticleSpec::table1());
        let f = derive_frequencies(&c, &p).unwrap();
        let closed = escape_rate(&f).unwrap();
        let g = golden_rule_log_rate(&c, &p).unwrap();
        assert!((g.log_rate - closed.log_rate).abs() <= 1e-10 * closed.log_rate.abs());
        assert!(closed.log10_t_esc > 1e7);
    }

    #[test]
    fn box_cancels() {
        let (c, p, _) = dimless(0.1, 0.07);
        let free = golden_rule_log_rate(&c, &p).unwrap().log_rate;
        for (r, z) in [(10.0, 10.0), (1e3, 20.0), (1e6, 1e4)] {
            let b = NominalBox::new(r, z).unwrap();
            let boxed = golden_rule_log_rate_in_box(&c, &p, &b).unwrap().log_rate;
            assert!((boxed - free).abs() < 1e-12 * free.abs());
        }
    }

    #[test]
    fn asymptotic_lines() {
        let f = DerivedFrequencies::from_omegas(1.0, 0.01, 1e-5).unwrap();
        assert!(!asymptotic_rate(&f, Regime::RadialDominated).unwrap().regime_mismatch);
        assert!(asymptotic_rate(&f, Regime::AxialDominated).unwrap().regime_mismatch);
        assert!(asymptotic_rate(&f, Regime::General).is_err());
    }

    #[test]
    fn sweep_shape() {
        let rows = rate_sweep(1.0, (1e-3, 0.1), (1e-3, 0.1), 4).unwrap();
        assert_eq!(rows.len(), 16);
        assert!((rows[15].k_r - 0.1).abs() < 1e-15 && (rows[15].k_z - 0.1).abs() < 1e-15);
        assert!(rate_sweep(1.0, (0.0, 0.1), (1e-3, 0.1), 4).is_err());
    }

    proptest::proptest! {
        #[test]
        fn rate_grows_along_rays(kr in 1e-3f64..0.3, kz in 1e-3f64..0.3, s in 1.01f64..3.0) {
            let f1 = DerivedFrequencies::from_omegas(1.0, kr, kz).unwrap();
            let f2 = DerivedFrequencies::from_omegas(1.0, s * kr, s * kz).unwrap();
            proptest::prop_assert!(escape_rate(&f2).unwrap().log_rate > escape_rate(&f1).unwrap().log_rate);
        }

        #[test]
        fn closed_form_agrees_with_its_quadrature(kr in 1e-4f64..0.5, kz in 1e-4f64..0.5) {
            let f = DerivedFrequencies::from_omegas(1.0, kr, kz).unwrap();
            proptest::prop_assert!(escape_rate(&f).unwrap().quadrature_error < 1e-12);
        }
    }
}
