//! The trapped `M = −1` ground state, the `M = 0` continuum and the
//! golden-rule matrix element between them.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::field::{DerivedFrequencies, ParticleSpec, TrapConfig};
use crate::special::{bessel_j1, bessel_j1_zero, bessel_j2};

/// Above this adiabaticity the harmonic approximation of the bound state is
/// no longer trustworthy.
pub const HARMONIC_LIMIT: f64 = 0.1;

fn check_frequencies(f: &DerivedFrequencies) -> Result<()> {
    for (name, v) in [("omega_p", f.omega_p), ("omega_r", f.omega_r), ("omega_z", f.omega_z)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// Lowest trapped state: ground state along `z`, angular factor `e^{iφ}` and
/// a Gaussian radial profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundState {
    pub freqs: DerivedFrequencies,
    /// `E₋ = μB0 + ½ħω_z + ħω_r` [erg].
    pub energy: f64,
    /// Azimuthal quantum number, always 1.
    pub nu: i32,
    /// `√(ħ/(mω_r))` [cm].
    pub width_r: f64,
    /// `√(ħ/(mω_z))` [cm].
    pub width_z: f64,
    /// Both adiabaticity parameters are below [`HARMONIC_LIMIT`].
    pub harmonic_valid: bool,
    mass: f64,
    hbar: f64,
}

impl BoundState {
    pub fn new(freqs: &DerivedFrequencies, p: &ParticleSpec, cfg: &TrapConfig) -> Result<Self> {
        check_frequencies(freqs)?;
        p.validate()?;
        cfg.validate()?;
        let hbar = p.spin;
        let harmonic_valid = freqs.k_r <= HARMONIC_LIMIT && freqs.k_z <= HARMONIC_LIMIT;
        if !harmonic_valid {
            log::warn!(
                "K_r = {:.3e}, K_z = {:.3e}: the harmonic bound state is outside its range of validity",
                freqs.k_r,
                freqs.k_z
            );
        }
        Ok(BoundState {
            freqs: *freqs,
            energy: p.mu * cfg.b0 + 0.5 * hbar * freqs.omega_z + hbar * freqs.omega_r,
            nu: 1,
            width_r: (hbar / (p.mass * freqs.omega_r)).sqrt(),
            width_z: (hbar / (p.mass * freqs.omega_z)).sqrt(),
            harmonic_valid,
            mass: p.mass,
            hbar,
        })
    }

    /// `α = mω_r/(2ħ)` in `e^{−αr²}`.
    pub fn alpha(&self) -> f64 {
        self.mass * self.freqs.omega_r / (2.0 * self.hbar)
    }

    /// `β = mω_z/(2ħ)` in `e^{−βz²}`.
    pub fn beta(&self) -> f64 {
        self.mass * self.freqs.omega_z / (2.0 * self.hbar)
    }

    /// `√(mω_r/(πħ))`.
    pub fn radial_norm(&self) -> f64 {
        (2.0 * self.alpha() / PI).sqrt()
    }

    /// `(mω_z/(πħ))^{1/4}`.
    pub fn axial_norm(&self) -> f64 {
        (2.0 * self.beta() / PI).powf(0.25)
    }

    pub fn psi(&self, r: f64, phi: f64, z: f64) -> Complex64 {
        let amp = self.radial_norm() * self.axial_norm() * (-self.alpha() * r * r - self.beta() * z * z).exp();
        Complex64::from_polar(amp, phi)
    }

    /// `(Δr/ℓ_r, Δz/ℓ_z)` where `ℓ_r = B0/√(B′² − ½B0B″)` and `ℓ_z = √(B0/B″)`
    /// are the lengths over which `μ|B|` changes appreciably. For a
    /// consistent trap these equal `(√K_r, √K_z)`.
    pub fn width_ratios(&self, cfg: &TrapConfig) -> (f64, f64) {
        (self.width_r / cfg.radial_length(), self.width_z / cfg.axial_length())
    }
}

/// Temporary cylindrical box (radius `R`, axial period `Z`) used to count and
/// normalise continuum states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NominalBox {
    pub radius: f64,
    pub period: f64,
}

impl NominalBox {
    pub fn new(radius: f64, period: f64) -> Result<Self> {
        if !(radius > 0.0 && period > 0.0 && radius.is_finite() && period.is_finite()) {
            return Err(Error::Domain(format!("box dimensions must be positive, got R={radius}, Z={period}")));
        }
        Ok(NominalBox { radius, period })
    }

    /// `dN/(dE dγ) = mZR/(2π²ħ²)`.
    pub fn density_of_states(&self, mass: f64, hbar: f64) -> f64 {
        mass * self.period * self.radius / (2.0 * PI * PI * hbar * hbar)
    }
}

/// A state of the box lattice: `k_r = j_{1,n}/R`, `k_z = 2πl/Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoxMode {
    /// Index of the zero of `J₁`, from 1.
    pub n: u32,
    pub l: i64,
}

/// `M = 0` continuum state `C_γ J₁(k_r r) e^{i(φ + k_z z)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuumState {
    /// Emission angle `γ ∈ (0, π)`.
    pub gamma: f64,
    pub k0: f64,
    pub k_r: f64,
    pub k_z: f64,
    /// Azimuthal quantum number, always 1 to match the bound state.
    pub beta: i32,
}

impl ContinuumState {
    pub fn new(k0: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < PI) {
            return Err(Error::Domain(format!("emission angle must lie in (0, pi), got {gamma}")));
        }
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(Error::Domain(format!("wave number must be positive, got {k0}")));
        }
        Ok(ContinuumState {
            gamma,
            k0,
            k_r: k0 * gamma.sin(),
            k_z: k0 * gamma.cos(),
            beta: 1,
        })
    }

    /// The state degenerate with the bottom of the trap, `k0 = √(2μmB0)/ħ`.
    pub fn at_trap_energy(p: &ParticleSpec, cfg: &TrapConfig, gamma: f64) -> Result<Self> {
        Self::new(trap_wavenumber(p, cfg), gamma)
    }

    pub fn from_box_mode(mode: BoxMode, b: &NominalBox) -> Result<Self> {
        if mode.n == 0 {
            return Err(Error::Domain("box modes are numbered from n = 1".into()));
        }
        let k_r = bessel_j1_zero(mode.n) / b.radius;
        let k_z = 2.0 * PI * mode.l as f64 / b.period;
        let k0 = k_r.hypot(k_z);
        let mut s = Self::new(k0, k_r.atan2(k_z))?;
        s.k_r = k_r;
        s.k_z = k_z;
        Ok(s)
    }

    /// Exact box normalisation `1/(πZR²J₂(k_rR)²)`.
    pub fn c_gamma_sq(&self, b: &NominalBox) -> f64 {
        let j2 = bessel_j2(self.k_r * b.radius);
        1.0 / (PI * b.period * b.radius * b.radius * j2 * j2)
    }

    /// Large-box form `k_r/(2ZR)`.
    pub fn c_gamma_sq_asymptotic(&self, b: &NominalBox) -> f64 {
        self.k_r / (2.0 * b.period * b.radius)
    }

    /// Unnormalised `J₁(k_r r) e^{i(φ + k_z z)}`.
    pub fn psi_unit(&self, r: f64, phi: f64, z: f64) -> Complex64 {
        Complex64::from_polar(bessel_j1(self.k_r * r), phi + self.k_z * z)
    }
}

/// `√(2μmB0)/ħ`.
pub fn trap_wavenumber(p: &ParticleSpec, cfg: &TrapConfig) -> f64 {
    (2.0 * p.mu * p.mass * cfg.b0).sqrt() / p.spin
}

/// `ħ²B′/(√2·m·B0)`, the `M = −1 → 0` matrix element of the coupling
/// without its radial derivative.
pub fn coupling_strength(p: &ParticleSpec, cfg: &TrapConfig) -> f64 {
    p.spin * p.spin * cfg.b_prime / (SQRT_2 * p.mass * cfg.b0)
}

/// `ln(|H_i^γ|²/C_γ²)` split into a `γ`-independent part and an O(1)
/// remainder, so that large exponents cancel exactly between angles.
fn log_matrix_element_over_norm_parts(
    freqs: &DerivedFrequencies,
    p: &ParticleSpec,
    cfg: &TrapConfig,
    gamma: f64,
) -> (f64, f64) {
    let (m, hbar) = (p.mass, p.spin);
    let (wr, wz) = (freqs.omega_r, freqs.omega_z);
    let k0 = trap_wavenumber(p, cfg);
    let (s, c) = gamma.sin_cos();
    // ħk0²/(mω) is the exponent scale; equals 2ω_p/ω when S = ħ
    let energy_ratio = hbar * k0 * k0 / m;
    let (a, b) = (energy_ratio / wr, energy_ratio / wz);
    // −a sin²γ − b cos²γ, with the larger constant pulled out
    let (exp_const, exp_var) = if a >= b { (-b, -(a - b) * s * s) } else { (-a, -(b - a) * c * c) };
    let constant = (4.0 * PI * PI).ln()
        + (m * wr / (PI * hbar)).ln()
        + 0.5 * (m * wz / (PI * hbar)).ln()
        + 2.0 * coupling_strength(p, cfg).ln()
        + 2.0 * (m * wr / hbar).ln()
        + (2.0 * PI * hbar / (m * wz)).ln()
        + 2.0 * (k0 * hbar * hbar / (m * m * wr * wr)).ln()
        + exp_const;
    (constant, 2.0 * s.abs().ln() + exp_var)
}

fn log_matrix_element_over_norm(freqs: &DerivedFrequencies, p: &ParticleSpec, cfg: &TrapConfig, gamma: f64) -> f64 {
    let (c, v) = log_matrix_element_over_norm_parts(freqs, p, cfg, gamma);
    c + v
}

/// [`log_matrix_element_sq`] as `(constant, remainder)`, the constant
/// being independent of `γ`.
pub fn log_matrix_element_sq_parts(
    freqs: &DerivedFrequencies,
    p: &ParticleSpec,
    cfg: &TrapConfig,
    gamma: f64,
) -> (f64, f64) {
    let k0 = trap_wavenumber(p, cfg);
    let (c, v) = log_matrix_element_over_norm_parts(freqs, p, cfg, gamma);
    (c + (0.5 * k0).ln(), v + gamma.sin().abs().ln())
}

/// `ln(|H_i^γ|² · ZR)`, with `C_γ²` taken in its large-box form so the box
/// dimensions factor out.
pub fn log_matrix_element_sq(freqs: &DerivedFrequencies, p: &ParticleSpec, cfg: &TrapConfig, gamma: f64) -> f64 {
    let (c, v) = log_matrix_element_sq_parts(freqs, p, cfg, gamma);
    c + v
}

/// `|H_i^γ|² · ZR` [erg²·cm²]. Underflows to zero for strongly adiabatic
/// traps; use [`log_matrix_element_sq`] there.
pub fn matrix_element_sq(freqs: &DerivedFrequencies, p: &ParticleSpec, cfg: &TrapConfig, gamma: f64) -> f64 {
    log_matrix_element_sq(freqs, p, cfg, gamma).exp()
}

/// `|H_i^γ|²` [erg²] in an explicit box, with the exact normalisation of
/// the continuum state at this `γ`.
pub fn matrix_element_sq_boxed(
    freqs: &DerivedFrequencies,
    p: &ParticleSpec,
    cfg: &TrapConfig,
    gamma: f64,
    b: &NominalBox,
) -> Result<f64> {
    let state = ContinuumState::at_trap_energy(p, cfg, gamma)?;
    Ok((log_matrix_element_over_norm(freqs, p, cfg, gamma)).exp() * state.c_gamma_sq(b))
}

/// `ln(C_γ² ρ_γ) = ln(m k0 sinγ / (4π²ħ²))`, in which the box cancels.
pub fn log_c2rho(k0: f64, gamma: f64, mass: f64, hbar: f64) -> f64 {
    (mass * k0 * gamma.sin().abs() / (4.0 * PI * PI * hbar * hbar)).ln()
}
