//! Generic numerical kernels used by the physics modules.
//!
//! * [`integrate`] / [`integrate_semi_infinite`]: globally adaptive
//!   Gauss–Kronrod (7/15) quadrature. The rule is open, so integrable
//!   endpoint singularities such as `x^{-1/2}` are handled by subdivision.
//! * [`solve_ivp`]: Dormand–Prince 5(4) with PI step control and the
//!   fourth-order continuous extension, returning a [`DenseSolution`].

mod ode;
mod quadrature;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ode::{solve_ivp, DenseSolution};
pub use quadrature::{integrate, integrate_semi_infinite, integrate_with_estimate, Estimate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 10_000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), NumericsError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_subdivisions >= 1) {
            return Err(NumericsError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// First trial step as a fraction of `t1 - t0`.
    pub initial_step: f64,
    pub max_steps: usize,
    /// Step-size cap as a fraction of `t1 - t0`.
    pub max_step: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            initial_step: 1e-6,
            max_steps: 1_000_000,
            max_step: 1e-2,
        }
    }
}

impl OdeConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), NumericsError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.initial_step > 0.0
            && self.max_step > 0.0
            && self.max_steps >= 1;
        if !ok {
            return Err(NumericsError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: estimate {estimate}, error bound {error_bound}"
    )]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow {
        t: f64,
        h: f64,
        partial: Box<DenseSolution>,
    },

    #[error("maximum number of steps ({steps}) exceeded at t = {t}")]
    MaxStepsExceeded {
        t: f64,
        steps: usize,
        partial: Box<DenseSolution>,
    },

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid numerical configuration: {0}")]
    InvalidConfig(String),
}
