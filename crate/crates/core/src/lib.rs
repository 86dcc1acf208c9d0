//! Classical and quantum-mechanical analysis of a neutral spin-1 particle held
//! in a Ioffe-Pritchard type magnetostatic trap.
//!
//! The crate is organised by capability:
//!
//! - [`field`]: trap and particle parameters, the trapping field and the
//!   characteristic frequencies derived from it.
//! - [`dynamics`]: the coupled classical equations for the centre of mass and
//!   the spin direction, integrated with an adaptive Runge-Kutta pair.
//! - [`stability`]: normal-mode analysis of the antiparallel equilibrium, the
//!   secular cubics and the stability region in the `(K_r², K_z²)` plane.
//! - [`quantum`]: the spin-flip escape rate of the trapped ground state via
//!   Fermi's golden rule, carried in log-space.
//! - [`special`] and [`quadrature`]: numerical building blocks.
//! - [`cli`]: the `magtrap` command-line front end.
//!
//! Runnable examples live in `examples/`, one per capability.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod quadrature;
pub mod quantum;
pub mod special;
pub mod stability;

pub use error::{Error, Result};
pub use field::{
    DerivedFrequencies, FieldSample, ParticleSpec, TrapConfig, HBAR_ERG_S,
};
