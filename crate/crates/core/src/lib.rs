//! Minimal energy cost of initializing a qubit in finite time.
//!
//! A two-level system with level spacing `λ(t)` is ramped from `0` to `λ_m`
//! while coupled to a bosonic bath, leaving a residual excited population `ε`.
//! The crate provides:
//!
//! * [`thermo`]: closed-form equilibrium quantities (Gibbs populations, bath
//!   occupation, dissipation coefficient, free-energy change, `ε ↔ λ_m`).
//! * [`numerics`]: adaptive Gauss–Kronrod quadrature and an adaptive
//!   Dormand–Prince integrator with dense output.
//! * [`geometry`]: the thermodynamic length `L(ε)`, the precise bound
//!   `L²(ε)/τ` and the asymptotic work–time–error bound.
//! * [`protocol`]: linear, power-law and geodesic (optimal) driving schedules.
//! * [`dynamics`]: exact integration of the population master equation with
//!   work bookkeeping, plus the first-order slow-driving expressions.
//! * [`experiments`]: named, deterministic reproduction recipes emitting
//!   CSV/JSON tables.
//!
//! Units: `ħ = k_B = 1`. Energies are in the same unit as `1/β`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod numerics;
pub mod protocol;
pub mod table;
pub mod thermo;

pub use dynamics::{simulate, InitialState, TrajectoryResult};
pub use error::{Error, Result};
pub use geometry::{thermodynamic_length, LengthReport};
pub use numerics::{OdeConfig, QuadratureConfig};
pub use protocol::{linear_protocol, optimal_protocol, power_protocol, Protocol, ProtocolKind};
pub use thermo::{BathSpectrum, ErasureTask, LevelSpacing};
