//! Trap geometry, particle parameters and the characteristic frequencies of
//! the problem.
//!
//! All physical quantities are CGS-Gaussian: Oe, cm, g, erg·s, emu. A
//! dimensionless particle (`m = μ = S = 1`) combined with `B0 = 1` measures
//! times in units of `1/ω_p`; see [`ParticleSpec::dimensionless`].

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

/// Reduced Planck constant in erg·s. Spin-1 particles carry `S = ħ`.
pub const HBAR_ERG_S: f64 = 1.054571817e-27;

/// Static field parameters of the trap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    /// Bias field at the trap centre [Oe].
    pub b0: f64,
    /// Lateral gradient `B′` [Oe/cm].
    pub b_prime: f64,
    /// Axial curvature `B″` [Oe/cm²].
    pub b_double_prime: f64,
}

impl TrapConfig {
    pub fn new(b0: f64, b_prime: f64, b_double_prime: f64) -> Result<Self> {
        let cfg = TrapConfig {
            b0,
            b_prime,
            b_double_prime,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Field parameters of a typical condensate trap: `B0 = 100 Oe`,
    /// `B0/B′ = √(B0/B″) = 10 cm`.
    pub fn table1() -> Self {
        TrapConfig {
            b0: 100.0,
            b_prime: 10.0,
            b_double_prime: 1.0,
        }
    }

    /// Builds the trap that produces the requested precession and vibration
    /// frequencies for `particle`.
    pub fn from_frequencies(
        particle: &ParticleSpec,
        omega_p: f64,
        omega_r: f64,
        omega_z: f64,
    ) -> Result<Self> {
        for (name, v) in [("omega_p", omega_p), ("omega_r", omega_r), ("omega_z", omega_z)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let b0 = omega_p * particle.spin / particle.mu;
        let b_double_prime = particle.mass * omega_z * omega_z / particle.mu;
        let b_prime2 = particle.mass * b0 * omega_r * omega_r / particle.mu + 0.5 * b0 * b_double_prime;
        TrapConfig::new(b0, b_prime2.sqrt(), b_double_prime)
    }

    /// `(B′)² − ½·B0·B″`, the radial curvature of `|B|` times `2·B0`.
    pub fn radial_curvature(&self) -> f64 {
        self.b_prime * self.b_prime - 0.5 * self.b0 * self.b_double_prime
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.b0.is_finite() && self.b_prime.is_finite() && self.b_double_prime.is_finite();
        if !finite {
            return Err(Error::Domain("trap parameters must be finite".into()));
        }
        if self.b0 <= 0.0 {
            return Err(Error::Domain(format!("bias field B0 must be positive, got {}", self.b0)));
        }
        if self.b_double_prime <= 0.0 {
            return Err(Error::Domain(format!(
                "axial curvature B'' must be positive, got {}",
                self.b_double_prime
            )));
        }
        if self.radial_curvature() <= 0.0 {
            return Err(Error::Domain(format!(
                "(B')^2 - B0*B''/2 = {} must be positive for a real lateral frequency",
                self.radial_curvature()
            )));
        }
        Ok(())
    }

    /// Length over which `μ|B|` changes appreciably along the axis, `√(B0/B″)`.
    pub fn axial_length(&self) -> f64 {
        (self.b0 / self.b_double_prime).sqrt()
    }

    /// Length over which `μ|B|` changes appreciably in the lateral plane,
    /// `B0/√((B′)² − ½B0B″)`.
    pub fn radial_length(&self) -> f64 {
        self.b0 / self.radial_curvature().sqrt()
    }
}

/// Mass, magnetic moment and spin of the trapped particle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleSpec {
    /// Mass [g].
    pub mass: f64,
    /// Magnetic moment [emu].
    pub mu: f64,
    /// Spin angular momentum [erg·s].
    pub spin: f64,
}

impl ParticleSpec {
    pub fn new(mass: f64, mu: f64, spin: f64) -> Result<Self> {
        let p = ParticleSpec { mass, mu, spin };
        p.validate()?;
        Ok(p)
    }

    /// Spin-1 particle, `S = ħ`.
    pub fn spin_one(mass: f64, mu: f64) -> Result<Self> {
        ParticleSpec::new(mass, mu, HBAR_ERG_S)
    }

    /// `m = 1e-22 g`, `μ = 1e-20 emu`, `S = ħ`.
    pub fn table1() -> Self {
        ParticleSpec {
            mass: 1e-22,
            mu: 1e-20,
            spin: HBAR_ERG_S,
        }
    }

    /// Unit mass, moment and spin. Together with `B0 = 1` this makes
    /// `ω_p = 1`, so times are measured in precession periods over `2π`.
    pub fn dimensionless() -> Self {
        ParticleSpec {
            mass: 1.0,
            mu: 1.0,
            spin: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mass", self.mass), ("mu", self.mu), ("spin", self.spin)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("particle {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Gyromagnetic ratio `μ/S`.
    pub fn gyromagnetic_ratio(&self) -> f64 {
        self.mu / self.spin
    }
}

/// Precession and vibration frequencies plus the adiabaticity ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedFrequencies {
    pub omega_p: f64,
    pub omega_z: f64,
    pub omega_r: f64,
    pub k_z: f64,
    pub k_r: f64,
}

impl DerivedFrequencies {
    /// Builds the frequency set directly, with `K_z = ω_z/ω_p`, `K_r = ω_r/ω_p`.
    pub fn from_omegas(omega_p: f64, omega_r: f64, omega_z: f64) -> Result<Self> {
        for (name, v) in [("omega_p", omega_p), ("omega_r", omega_r), ("omega_z", omega_z)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(DerivedFrequencies {
            omega_p,
            omega_z,
            omega_r,
            k_z: omega_z / omega_p,
            k_r: omega_r / omega_p,
        })
    }
}

pub fn derive_frequencies(cfg: &TrapConfig, p: &ParticleSpec) -> Result<DerivedFrequencies> {
    cfg.validate()?;
    p.validate()?;
    let omega_p = p.mu * cfg.b0 / p.spin;
    let omega_z = (p.mu * cfg.b_double_prime / p.mass).sqrt();
    let omega_r = (p.mu * cfg.radial_curvature() / (p.mass * cfg.b0)).sqrt();
    DerivedFrequencies::from_omegas(omega_p, omega_r, omega_z)
}

/// The field vector at a point together with its amplitude and orientation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub b_vec: Vector3<f64>,
    pub amplitude: f64,
    /// Polar angle of `B` measured from `ẑ`, in `[0, π]`.
    pub theta: f64,
    /// Azimuth of the lateral projection of `B`, in `(−π, π]`.
    pub varphi: f64,
}

/// Field vector of the Ioffe-Pritchard trap at `pos` [cm].
pub fn field_vector(cfg: &TrapConfig, pos: &Vector3<f64>) -> Vector3<f64> {
    let (x, y, z) = (pos.x, pos.y, pos.z);
    let bpp = cfg.b_double_prime;
    Vector3::new(
        (cfg.b_prime - 0.5 * bpp * z) * x,
        (-cfg.b_prime - 0.5 * bpp * z) * y,
        cfg.b0 + 0.5 * bpp * z * z - 0.25 * bpp * (x * x + y * y),
    )
}

pub fn field_at(cfg: &TrapConfig, pos: &Vector3<f64>) -> FieldSample {
    let b_vec = field_vector(cfg, pos);
    let lateral = b_vec.x.hypot(b_vec.y);
    FieldSample {
        b_vec,
        amplitude: b_vec.norm(),
        theta: lateral.atan2(b_vec.z),
        varphi: b_vec.y.atan2(b_vec.x),
    }
}

/// Jacobian `∂B_i/∂x_j` of the field at `pos`. Symmetric and traceless.
pub fn field_jacobian(cfg: &TrapConfig, pos: &Vector3<f64>) -> Matrix3<f64> {
    let (x, y, z) = (pos.x, pos.y, pos.z);
    let bpp = cfg.b_double_prime;
    let bp = cfg.b_prime;
    Matrix3::new(
        bp - 0.5 * bpp * z, 0.0, -0.5 * bpp * x,
        0.0, -bp - 0.5 * bpp * z, -0.5 * bpp * y,
        -0.5 * bpp * x, -0.5 * bpp * y, bpp * z,
    )
}

/// Near-origin amplitude and orientation of the field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxField {
    pub amplitude: f64,
    pub theta: f64,
    pub varphi: f64,
}

/// Quadratic expansion of `|B|` with `θ ≈ B′r/B0` and `φ_B ≈ −φ`, at the
/// cylindrical point `(r, φ, z)`.
///
/// The `O(z·sin 2φ)` correction to the azimuth is dropped. The caller decides
/// whether the point is close enough to the origin for the expansion to hold.
pub fn field_approx_at(cfg: &TrapConfig, r: f64, phi: f64, z: f64) -> ApproxField {
    let b0 = cfg.b0;
    let amplitude = b0
        * (1.0
            + cfg.b_double_prime * z * z / (2.0 * b0)
            + cfg.radial_curvature() / (2.0 * b0 * b0) * r * r);
    ApproxField {
        amplitude,
        theta: cfg.b_prime * r / b0,
        varphi: wrap_angle(-phi),
    }
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxwellResidual {
    pub divergence: f64,
    pub curl: Vector3<f64>,
}

/// Central-difference divergence and curl of the trap field at `pos`.
pub fn check_maxwell(cfg: &TrapConfig, pos: &Vector3<f64>, h: f64) -> MaxwellResidual {
    assert!(h > 0.0, "finite-difference step must be positive");
    // d[j] holds ∂B/∂x_j as a vector
    let d: Vec<Vector3<f64>> = (0..3)
        .map(|j| {
            let mut e = Vector3::zeros();
            e[j] = h;
            (field_vector(cfg, &(pos + e)) - field_vector(cfg, &(pos - e))) / (2.0 * h)
        })
        .collect();
    MaxwellResidual {
        divergence: d[0].x + d[1].y + d[2].z,
        curl: Vector3::new(d[1].z - d[2].y, d[2].x - d[0].z, d[0].y - d[1].x),
    }
}

/// JSON configuration document: trap plus particle in CGS units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "B0_oe")]
    pub b0_oe: f64,
    #[serde(rename = "Bprime_oe_per_cm")]
    pub bprime_oe_per_cm: f64,
    #[serde(rename = "Bpp_oe_per_cm2")]
    pub bpp_oe_per_cm2: f64,
    pub mass_g: f64,
    pub mu_emu: f64,
    #[serde(default = "default_spin")]
    pub spin_erg_s: f64,
}

fn default_spin() -> f64 {
    HBAR_ERG_S
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("cannot parse config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn table1() -> Self {
        Self::from_parts(&TrapConfig::table1(), &ParticleSpec::table1())
    }

    pub fn from_parts(trap: &TrapConfig, particle: &ParticleSpec) -> Self {
        ConfigFile {
            b0_oe: trap.b0,
            bprime_oe_per_cm: trap.b_prime,
            bpp_oe_per_cm2: trap.b_double_prime,
            mass_g: particle.mass,
            mu_emu: particle.mu,
            spin_erg_s: particle.spin,
        }
    }

    /// Validated trap and particle.
    pub fn split(&self) -> Result<(TrapConfig, ParticleSpec)> {
        let trap = TrapConfig::new(self.b0_oe, self.bprime_oe_per_cm, self.bpp_oe_per_cm2)
            .map_err(|e| Error::Config(e.to_string()))?;
        let particle = ParticleSpec::new(self.mass_g, self.mu_emu, self.spin_erg_s)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok((trap, particle))
    }
}
