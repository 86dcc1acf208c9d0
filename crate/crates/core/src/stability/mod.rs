//! Linear stability of the antiparallel equilibrium.
//!
//! Linearising about `n̂ = −ẑ` at the origin decouples the axial coordinate
//! and splits the lateral/spin subspace into two circularly polarised pairs,
//! `Γ+ = (δx + iδy, ε_x − iε_y)` and `Γ− = (δx − iδy, ε_x + iε_y)`. Writing
//! `x = ω/ω_p`, their secular equations are
//!
//! ```text
//! Γ+ :  x³ + x² + ½K_z²·x − K_r² = 0
//! Γ− :  x³ − x² + ½K_z²·x + K_r² = 0
//! ```
//!
//! and the equilibrium is stable when all three roots of either cubic are
//! real. The edge of the stable region is the double-root locus
//! `K_r² = 2t³ − t²`, `K_z² = 4t − 6t²` for `t ∈ [1/2, 2/3]`.

pub mod cubic;
mod map;

pub use cubic::{MonicCubic, RootClass};
pub use map::{plot_script, write_boundary_csv, MapCell, MapGrid, StabilityMap};

use nalgebra::SMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{DerivedFrequencies, ParticleSpec, TrapConfig};

/// A point in the `(K_r², K_z²)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdiabaticityPoint {
    pub k_r2: f64,
    pub k_z2: f64,
}

impl AdiabaticityPoint {
    pub fn new(k_r2: f64, k_z2: f64) -> Result<Self> {
        if !(k_r2 >= 0.0 && k_z2 >= 0.0 && k_r2.is_finite() && k_z2.is_finite()) {
            return Err(Error::Domain(format!(
                "adiabaticity parameters must be non-negative, got K_r^2={k_r2}, K_z^2={k_z2}"
            )));
        }
        Ok(AdiabaticityPoint { k_r2, k_z2 })
    }

    pub fn from_frequencies(freqs: &DerivedFrequencies) -> Self {
        AdiabaticityPoint {
            k_r2: freqs.k_r * freqs.k_r,
            k_z2: freqs.k_z * freqs.k_z,
        }
    }

    /// The trap that realises this point for a dimensionless particle
    /// (`m = μ = S = B0 = 1`, hence `ω_p = 1`). Both parameters must be positive.
    pub fn dimensionless_trap(&self) -> Result<TrapConfig> {
        TrapConfig::from_frequencies(&ParticleSpec::dimensionless(), 1.0, self.k_r2.sqrt(), self.k_z2.sqrt())
    }

    /// Secular cubic of the requested branch.
    pub fn cubic(&self, branch: Branch) -> MonicCubic {
        let half_kz2 = 0.5 * self.k_z2;
        match branch {
            Branch::Plus => MonicCubic::new(1.0, half_kz2, -self.k_r2),
            Branch::Minus => MonicCubic::new(-1.0, half_kz2, self.k_r2),
        }
    }
}

/// The two invariant subspaces of the lateral/spin dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    /// `(δx + iδy, ε_x − iε_y)`.
    Plus,
    /// `(δx − iδy, ε_x + iε_y)`.
    Minus,
}

impl Branch {
    /// Sense of the lateral vibration and of the coupled spin precession,
    /// for modes whose frequency is taken positive.
    pub fn chirality(&self) -> &'static str {
        match self {
            Branch::Plus => "lateral motion counter-clockwise, spin precession clockwise",
            Branch::Minus => "lateral motion clockwise, spin precession counter-clockwise",
        }
    }
}

/// Roots `ω/ω_p` of one branch's secular cubic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeSpectrum {
    pub branch: Branch,
    /// Sorted by real part, descending.
    #[serde(serialize_with = "serialize_roots")]
    pub roots: [Complex64; 3],
    pub class: RootClass,
    /// Three real roots (distinct or repeated).
    pub stable: bool,
}

fn serialize_roots<S: serde::Serializer>(roots: &[Complex64; 3], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(3))?;
    for r in roots {
        seq.serialize_element(&(r.re, r.im))?;
    }
    seq.end()
}

pub fn secular_roots(point: &AdiabaticityPoint, branch: Branch) -> ModeSpectrum {
    let cubic = point.cubic(branch);
    let class = cubic.classify();
    ModeSpectrum {
        branch,
        roots: cubic.roots(),
        class,
        stable: class != RootClass::Unstable,
    }
}

pub fn classify(point: &AdiabaticityPoint) -> RootClass {
    point.cubic(Branch::Minus).classify()
}

/// True when the `Γ−` cubic has three real roots; repeated roots on the
/// boundary count as stable.
pub fn is_stable(point: &AdiabaticityPoint) -> bool {
    classify(point) != RootClass::Unstable
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundarySample {
    pub t: f64,
    pub k_r2: f64,
    pub k_z2: f64,
}

impl BoundarySample {
    pub fn at(t: f64) -> Self {
        BoundarySample {
            t,
            k_r2: 2.0 * t.powi(3) - t * t,
            k_z2: 4.0 * t - 6.0 * t * t,
        }
    }

    pub fn point(&self) -> AdiabaticityPoint {
        AdiabaticityPoint {
            k_r2: self.k_r2,
            k_z2: self.k_z2,
        }
    }
}

/// The marginal-stability locus, ordered by increasing `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryCurve {
    pub samples: Vec<BoundarySample>,
}

/// `n ≥ 2` samples uniform in `t` over the closed interval `[1/2, 2/3]`, so
/// the first and last samples are the axis intercepts `(0, 1/2)` and
/// `(4/27, 0)`.
pub fn boundary_curve(n: usize) -> BoundaryCurve {
    assert!(n >= 2, "a boundary curve needs at least two samples");
    let (lo, hi) = (0.5, 2.0 / 3.0);
    let samples = (0..n)
        .map(|i| {
            let t = match i {
                0 => lo,
                _ if i == n - 1 => hi,
                _ => lo + (hi - lo) * i as f64 / (n - 1) as f64,
            };
            BoundarySample::at(t)
        })
        .collect();
    BoundaryCurve { samples }
}

/// Largest stable `K_r²` at the given `K_z²`, from eliminating `t` in the
/// parametric boundary. `None` above `K_z² = 1/2`, where no `K_r² ≥ 0` is
/// stable except the axis itself.
pub fn boundary_kr2(k_z2: f64) -> Option<f64> {
    if !(0.0..=0.5).contains(&k_z2) {
        return None;
    }
    // 6t² − 4t + K_z² = 0, larger root lies in [1/2, 2/3]
    let t = (2.0 + (4.0 - 6.0 * k_z2).sqrt()) / 6.0;
    Some((2.0 * t.powi(3) - t * t).max(0.0))
}

/// Eigenvalues of the linearised lateral/spin system and of the axial block.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianSpectrum {
    /// Coefficient matrix on `(δx, δy, δẋ, δẏ, ε̃_x, ε̃_y)`.
    pub matrix: SMatrix<f64, 6, 6>,
    /// Six eigenvalues `λ`, sorted by imaginary part descending; modes go as `e^{λt}`.
    pub in_plane: Vec<Complex64>,
    /// `±iω_z` from `δz̈ = −ω_z² δz`.
    pub axial: [Complex64; 2],
}

/// Coefficient matrix of the linearised lateral/spin equations in terms of
/// `ω_p`, `ω_r²` and `ω_z²` alone.
///
/// The spin tilt is carried as the length `ε̃ = ε·μB′/(mω_p)`, which makes
/// the matrix independent of the individual field and particle parameters.
pub fn linearized_matrix(omega_p: f64, omega_r2: f64, omega_z2: f64) -> SMatrix<f64, 6, 6> {
    let half_z2 = 0.5 * omega_z2;
    let coupling = omega_r2 + half_z2;
    let mut a = SMatrix::<f64, 6, 6>::zeros();
    // positions -> velocities
    a[(0, 2)] = 1.0;
    a[(1, 3)] = 1.0;
    // m δẍ = ½μB″ δx + μB′ ε_x ; m δÿ = ½μB″ δy − μB′ ε_y
    a[(2, 0)] = half_z2;
    a[(2, 4)] = omega_p;
    a[(3, 1)] = half_z2;
    a[(3, 5)] = -omega_p;
    // S ε̇_x = μB0 ε_y − μB′ δy ; S ε̇_y = −μB0 ε_x − μB′ δx
    a[(4, 5)] = omega_p;
    a[(4, 1)] = -coupling;
    a[(5, 4)] = -omega_p;
    a[(5, 0)] = -coupling;
    a
}

pub fn linearized_spectrum(omega_p: f64, omega_r2: f64, omega_z2: f64) -> JacobianSpectrum {
    let matrix = linearized_matrix(omega_p, omega_r2, omega_z2);
    let mut in_plane: Vec<Complex64> = matrix.complex_eigenvalues().iter().copied().collect();
    in_plane.sort_by(|x, y| y.im.total_cmp(&x.im).then(y.re.total_cmp(&x.re)));
    let wz = omega_z2.sqrt();
    JacobianSpectrum {
        matrix,
        in_plane,
        axial: [Complex64::new(0.0, wz), Complex64::new(0.0, -wz)],
    }
}

pub fn linearized_jacobian_spectrum(freqs: &DerivedFrequencies) -> JacobianSpectrum {
    linearized_spectrum(freqs.omega_p, freqs.omega_r * freqs.omega_r, freqs.omega_z * freqs.omega_z)
}

/// Eigenvalues `−iω_p·x` predicted by the roots `x` of both secular cubics,
/// sorted like [`JacobianSpectrum::in_plane`].
pub fn predicted_eigenvalues(point: &AdiabaticityPoint, omega_p: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = [Branch::Plus, Branch::Minus]
        .iter()
        .flat_map(|&b| secular_roots(point, b).roots)
        .map(|x| Complex64::new(0.0, -omega_p) * x)
        .collect();
    out.sort_by(|x, y| y.im.total_cmp(&x.im).then(y.re.total_cmp(&x.re)));
    out
}
