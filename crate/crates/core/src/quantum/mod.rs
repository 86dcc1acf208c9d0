//! Quantum spin-flip escape of the trapped spin-1 ground state.
//!
//! In the frame that follows the local field the Hamiltonian separates into
//! a spin-diagonal part, whose `M = −1` component is a cylindrical harmonic
//! trap and whose `M = 0` component is free, and a coupling
//! `H_int = i(ħ²B′/(mB0)) ŝ_y ∂/∂r`. The golden-rule rate from the bound
//! state into the equal-energy `M = 0` continuum reduces to
//!
//! ```text
//! 1/T_esc = 2√(2π) (2ω_r² + ω_z²) √ω_p / (ω_r √ω_z) · I(2ω_p/ω_r, 2ω_p/ω_z)
//! I(a, b) = ∫₀^π sin³γ · exp(−a sin²γ − b cos²γ) dγ
//! ```
//!
//! Realistic traps put `exp(−2ω_p/ω)` far below the smallest `f64`, so every
//! rate is carried as its natural logarithm.
//!
//! The spin is taken to be ħ, so `ParticleSpec::spin` plays the role of ħ
//! throughout; in dimensionless mode that makes `ħ = 1`.

mod integrals;
mod rate;
mod spin;
mod states;

pub use integrals::{i0_integral, i_integral, log_i0_integral, log_i_integral, log_j, log_j_quadrature};
pub use rate::{
    asymptotic_rate, classify_regime, escape_rate, golden_rule_log_rate, log10_t_esc, log_prefactor,
    golden_rule_log_rate_in_box, rate_sweep, AsymptoticRate, EscapeRateResult, GoldenRule, Regime, SweepRow,
};
pub use spin::{
    conjugate, diagonalization_check, exp_i_sy, exp_i_sz, expm_hermitian, magnetic_hamiltonian, rotation,
    rotation_identity_check, CMatrix3, SpinOneMatrices,
};
pub use states::{
    coupling_strength, log_c2rho, log_matrix_element_sq, log_matrix_element_sq_parts, matrix_element_sq, matrix_element_sq_boxed, trap_wavenumber, BoundState,
    BoxMode, ContinuumState, NominalBox,
};
