//! Adiabatic dark-passage (STIRAP) simulation for XY-coupled spin chains.
//!
//! The crate is organised bottom-up:
//!
//! * [`pulse`], [`chain`] and [`state`] hold the domain values (coupling
//!   envelopes, chain layouts, state vectors).
//! * [`hamiltonian`] assembles the chain Hamiltonian in the single-excitation
//!   sector or in the full `2^N` space, and exposes it as a [`Generator`].
//! * [`darkstate`] and [`adiabatic`] provide the closed-form eigensystem, the
//!   null-space oracle and the adiabatic-frame machinery.
//! * [`propagator`] integrates the time-dependent Schrödinger equation.
//! * [`protocols`] drives complete transfer and rotation experiments, and
//!   [`analysis`] turns their output into fidelities, traces and sweep tables.
//!
//! Units are chosen so that ħ = 1: couplings are angular frequencies and
//! times are their inverses.

pub mod adiabatic;
pub mod analysis;
pub mod chain;
pub mod darkstate;
mod error;
pub mod hamiltonian;
pub mod propagator;
pub mod protocols;
pub mod pulse;
pub mod state;

pub use error::{Error, Result};
pub use hamiltonian::Generator;

/// Complex amplitude type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Largest chain for which the full `2^N` space may be built.
pub const DEFAULT_FULL_SPACE_CAP: usize = 12;
