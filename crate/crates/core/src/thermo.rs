//! Closed-form equilibrium quantities of the driven two-level system.
//!
//! Everything here is a pure function of its arguments. The Hamiltonian is
//! `H = λ σ_z / 2`, so the level spacing is `λ` and the excited state sits
//! `λ/2` above zero.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `βλ` the combined rates use their small-argument series.
const SERIES_THRESHOLD: f64 = 1e-6;

/// Dissipation law `γ(λ) = γ₀ λ^α` of the bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpectrum {
    alpha: f64,
    gamma0: f64,
}

impl BathSpectrum {
    pub fn new(alpha: f64, gamma0: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::domain(
                "BathSpectrum",
                format!("alpha must be >= 0, got {alpha}"),
            ));
        }
        if !(gamma0.is_finite() && gamma0 > 0.0) {
            return Err(Error::domain(
                "BathSpectrum",
                format!("gamma0 must be > 0, got {gamma0}"),
            ));
        }
        Ok(Self { alpha, gamma0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// `γ₀ λ^α`. At `λ = 0` this is `γ₀` for `α = 0` and `0` otherwise.
    pub fn dissipation(&self, lambda: f64) -> f64 {
        if self.alpha == 0.0 {
            self.gamma0
        } else {
            self.gamma0 * lambda.powf(self.alpha)
        }
    }

    /// Total relaxation rate `γ(λ)[2n(λ) + 1] = γ₀ λ^α coth(βλ/2)` of the
    /// master equation. Finite at `λ = 0` only for `α ≥ 1`.
    pub fn relaxation_rate(&self, lambda: f64, beta: f64) -> f64 {
        let x = beta * lambda;
        if x < SERIES_THRESHOLD {
            // λ^α coth(βλ/2) = 2λ^{α-1}/β + βλ^{α+1}/6 + O(λ^{α+3})
            let lead = if self.alpha == 1.0 {
                1.0
            } else {
                lambda.powf(self.alpha - 1.0)
            };
            return self.gamma0 * (2.0 * lead / beta + beta * lambda.powf(self.alpha + 1.0) / 6.0);
        }
        self.dissipation(lambda) / (0.5 * x).tanh()
    }
}

/// An erasure target: inverse temperature, tolerated error and duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErasureTask {
    beta: f64,
    epsilon: f64,
    tau: f64,
}

impl ErasureTask {
    pub fn new(beta: f64, epsilon: f64, tau: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::domain("ErasureTask", format!("beta must be > 0, got {beta}")));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::domain("ErasureTask", format!("tau must be > 0, got {tau}")));
        }
        if !(epsilon > 0.0 && epsilon <= 0.5) {
            return Err(Error::domain(
                "ErasureTask",
                format!("epsilon must lie in (0, 1/2], got {epsilon}"),
            ));
        }
        Ok(Self { beta, epsilon, tau })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Same target with a different duration.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.beta, self.epsilon, tau)
    }

    pub fn lambda_max(&self) -> f64 {
        lambda_max_unchecked(self.epsilon, self.beta)
    }

    pub fn free_energy_change(&self) -> f64 {
        free_energy_change(self)
    }
}

/// Level spacing `λ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LevelSpacing(f64);

impl LevelSpacing {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_nan() || lambda < 0.0 {
            return Err(Error::domain(
                "LevelSpacing",
                format!("lambda must be >= 0, got {lambda}"),
            ));
        }
        Ok(Self(lambda))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Excited-state Gibbs population as a function of `x = βλ ≥ 0`.
#[inline]
pub(crate) fn gibbs_excited(x: f64) -> f64 {
    1.0 / (1.0 + x.exp())
}

/// `∂p_eq/∂λ = −β p_eq (1 − p_eq)`.
#[inline]
pub(crate) fn gibbs_excited_slope(lambda: f64, beta: f64) -> f64 {
    let p = gibbs_excited(beta * lambda);
    -beta * p * (1.0 - p)
}

/// `(1 − e^{−x}) e^{−x} / (1 + e^{−x})³`, the common factor of the
/// slow-driving dissipation. Equals `(1 − 2p)p(1 − p)` with `p = p_eq(x)`.
#[inline]
pub(crate) fn dissipation_shape(x: f64) -> f64 {
    let e = (-x).exp();
    let one_plus = 1.0 + e;
    -(-x).exp_m1() * e / (one_plus * one_plus * one_plus)
}

fn check_beta(op: &'static str, beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("beta must be > 0, got {beta}")))
    }
}

/// `e^{−βλ} / (1 + e^{−βλ})`, the excited population in equilibrium.
pub fn equilibrium_population(lambda: f64, beta: f64) -> Result<f64> {
    check_beta("equilibrium_population", beta)?;
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::domain(
            "equilibrium_population",
            format!("lambda must be >= 0, got {lambda}"),
        ));
    }
    Ok(gibbs_excited(beta * lambda))
}

/// Mean bath occupation `1 / (e^{βλ} − 1)`.
pub fn bath_occupation(lambda: f64, beta: f64) -> Result<f64> {
    check_beta("bath_occupation", beta)?;
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::domain(
            "bath_occupation",
            format!("occupation diverges for lambda <= 0, got {lambda}"),
        ));
    }
    Ok(1.0 / (beta * lambda).exp_m1())
}

pub fn dissipation_coefficient(spectrum: &BathSpectrum, lambda: f64) -> f64 {
    spectrum.dissipation(lambda)
}

/// Binary Shannon entropy in nats, continuously extended to the endpoints.
pub fn shannon_entropy(epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::domain(
            "shannon_entropy",
            format!("probability must lie in [0, 1], got {epsilon}"),
        ));
    }
    let term = |p: f64| if p < 1e-300 { 0.0 } else { -p * p.ln() };
    let q = 1.0 - epsilon;
    let second = if q < 1e-300 { 0.0 } else { -q * (-epsilon).ln_1p() };
    Ok(term(epsilon) + second)
}

/// `ΔF = β⁻¹[ln 2 − S(ε)]`, the quasi-static cost of the erasure.
pub fn free_energy_change(task: &ErasureTask) -> f64 {
    // epsilon is validated by ErasureTask
    let s = shannon_entropy(task.epsilon).unwrap_or(0.0);
    (LN_2 - s) / task.beta
}

/// `λ_m = β⁻¹ ln(ε⁻¹ − 1)`, the spacing whose Gibbs state has error `ε`.
pub fn lambda_max_for_error(epsilon: f64, beta: f64) -> Result<f64> {
    check_beta("lambda_max_for_error", beta)?;
    if epsilon == 0.0 {
        return Err(Error::domain(
            "lambda_max_for_error",
            "perfect erasure (epsilon = 0) needs infinite spacing",
        ));
    }
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::domain(
            "lambda_max_for_error",
            format!("epsilon must lie in (0, 1/2], got {epsilon}"),
        ));
    }
    Ok(lambda_max_unchecked(epsilon, beta))
}

#[inline]
pub(crate) fn lambda_max_unchecked(epsilon: f64, beta: f64) -> f64 {
    // ln((1-ε)/ε), written to stay accurate for tiny ε
    ((-epsilon).ln_1p() - epsilon.ln()) / beta
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn equilibrium_population_examples() {
        assert_eq!(equilibrium_population(0.0, 1.0).unwrap(), 0.5);
        assert_abs_diff_eq!(equilibrium_population(3f64.ln(), 1.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(equilibrium_population(4.59512, 1.0).unwrap(), 0.01, epsilon = 1e-6);
    }

    #[test]
    fn equilibrium_population_rejects_bad_input() {
        assert!(equilibrium_population(-1.0, 1.0).is_err());
        assert!(equilibrium_population(1.0, 0.0).is_err());
        assert!(equilibrium_population(1.0, -2.0).is_err());
    }

    #[test]
    fn bath_occupation_examples() {
        assert_abs_diff_eq!(bath_occupation(2f64.ln(), 1.0).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bath_occupation(2f64.ln(), 2.0).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        // 1/(e^10 − 1) = e^{-10}/(1 − e^{-10}); e^{-10} alone is off by 2e-9
        let oracle = (-10f64).exp() / -(-10f64).exp_m1();
        assert_abs_diff_eq!(bath_occupation(10.0, 1.0).unwrap(), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(bath_occupation(10.0, 1.0).unwrap(), 4.540199e-5, epsilon = 1e-11);
        assert!(bath_occupation(0.0, 1.0).is_err());
    }

    #[test]
    fn dissipation_coefficient_examples() {
        let constant = BathSpectrum::new(0.0, 1.0).unwrap();
        assert_eq!(dissipation_coefficient(&constant, 7.3), 1.0);
        assert_eq!(dissipation_coefficient(&constant, 0.0), 1.0);
        let ohmic = BathSpectrum::new(1.0, 2.0).unwrap();
        assert_eq!(dissipation_coefficient(&ohmic, 3.0), 6.0);
        let superohmic = BathSpectrum::new(2.0, 1.0).unwrap();
        assert_eq!(dissipation_coefficient(&superohmic, 0.0), 0.0);
    }

    #[test]
    fn spectrum_and_task_invariants() {
        assert!(BathSpectrum::new(-0.1, 1.0).is_err());
        assert!(BathSpectrum::new(1.0, 0.0).is_err());
        assert!(ErasureTask::new(1.0, 0.0, 1.0).is_err());
        assert!(ErasureTask::new(1.0, 0.6, 1.0).is_err());
        assert!(ErasureTask::new(1.0, 0.5, 1.0).is_ok());
        assert!(ErasureTask::new(0.0, 0.1, 1.0).is_err());
        assert!(ErasureTask::new(1.0, 0.1, 0.0).is_err());
        assert!(LevelSpacing::new(-1e-3).is_err());
        assert_eq!(LevelSpacing::new(2.0).unwrap().get(), 2.0);
    }

    #[test]
    fn shannon_entropy_examples() {
        assert_abs_diff_eq!(shannon_entropy(0.5).unwrap(), LN_2, epsilon = 1e-15);
        assert_eq!(shannon_entropy(0.0).unwrap(), 0.0);
        assert_eq!(shannon_entropy(1.0).unwrap(), 0.0);
        // 0.01·ln(100) + 0.99·ln(1/0.99)
        let oracle = 0.01 * 100f64.ln() + 0.99 * (1.0f64 / 0.99).ln();
        assert_abs_diff_eq!(shannon_entropy(0.01).unwrap(), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(shannon_entropy(0.01).unwrap(), 0.0560015, epsilon = 1e-6);
        assert!(shannon_entropy(1.5).is_err());
        assert!(shannon_entropy(-0.1).is_err());
    }

    #[test]
    fn free_energy_change_examples() {
        let near_perfect = ErasureTask::new(1.0, 1e-300, 1.0).unwrap();
        assert_abs_diff_eq!(free_energy_change(&near_perfect), LN_2, epsilon = 1e-12);
        let none = ErasureTask::new(1.0, 0.5, 1.0).unwrap();
        assert_abs_diff_eq!(free_energy_change(&none), 0.0, epsilon = 1e-15);
        let task = ErasureTask::new(2.0, 0.01, 1.0).unwrap();
        let entropy = 0.01 * 100f64.ln() + 0.99 * (1.0f64 / 0.99).ln();
        assert_abs_diff_eq!(free_energy_change(&task), (LN_2 - entropy) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(free_energy_change(&task), 0.318573, epsilon = 1e-6);
    }

    #[test]
    fn lambda_max_examples() {
        assert_eq!(lambda_max_for_error(0.5, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(lambda_max_for_error(0.01, 1.0).unwrap(), 99f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(lambda_max_for_error(0.01, 1.0).unwrap(), 4.59512, epsilon = 1e-5);
        assert!(lambda_max_for_error(0.0, 1.0).is_err());
        assert!(lambda_max_for_error(0.7, 1.0).is_err());
    }

    #[test]
    fn relaxation_rate_small_spacing_limits() {
        let beta = 2.0;
        let ohmic = BathSpectrum::new(1.0, 3.0).unwrap();
        assert_abs_diff_eq!(ohmic.relaxation_rate(0.0, beta), 2.0 * 3.0 / beta, epsilon = 1e-15);
        let superohmic = BathSpectrum::new(2.0, 1.0).unwrap();
        assert_eq!(superohmic.relaxation_rate(0.0, beta), 0.0);
        let constant = BathSpectrum::new(0.0, 1.0).unwrap();
        assert!(constant.relaxation_rate(0.0, beta).is_infinite());
        // series and closed form agree across the switch-over
        for spectrum in [ohmic, superohmic, constant] {
            let below = spectrum.relaxation_rate(0.999e-6 / beta, beta);
            let above = spectrum.relaxation_rate(1.001e-6 / beta, beta);
            let lambda = 1e-6 / beta;
            let exact = spectrum.dissipation(lambda) / (0.5 * beta * lambda).tanh();
            assert!((below - exact).abs() / exact < 2e-3);
            assert!((above - exact).abs() / exact < 2e-3);
        }
    }

    #[test]
    fn gibbs_is_fixed_point_of_master_equation() {
        // n/(2n+1) on a log-spaced grid of spacings
        for beta in [0.3, 1.0, 4.0] {
            for k in 0..=60 {
                let lambda = 10f64.powf(-6.0 + k as f64 * 0.125);
                let n = bath_occupation(lambda, beta).unwrap();
                let fixed = n / (2.0 * n + 1.0);
                let p = equilibrium_population(lambda, beta).unwrap();
                assert!((fixed - p).abs() <= 1e-12, "lambda={lambda} beta={beta}");
            }
        }
    }

    #[test]
    fn free_energy_decreases_with_error() {
        let mut last = f64::INFINITY;
        for k in 0..200 {
            let eps = 1e-9 + (0.5 - 1e-9) * k as f64 / 199.0;
            let df = free_energy_change(&ErasureTask::new(1.0, eps, 1.0).unwrap());
            assert!(df < last);
            last = df;
        }
    }

    proptest! {
        #[test]
        fn equilibrium_population_decreasing(a in 0.0..50.0f64, d in 1e-6..5.0f64, beta in 0.1..10.0f64) {
            let p1 = equilibrium_population(a, beta).unwrap();
            let p2 = equilibrium_population(a + d, beta).unwrap();
            prop_assert!(p2 < p1);
            prop_assert!(p1 > 0.0 && p1 <= 0.5);
        }

        #[test]
        fn lambda_max_inverts_equilibrium(log_eps in -8.0..(0.5f64.log10()), beta in 0.1..10.0f64) {
            let eps = 10f64.powf(log_eps);
            let lambda = lambda_max_for_error(eps, beta).unwrap();
            let back = equilibrium_population(lambda, beta).unwrap();
            prop_assert!((back - eps).abs() <= 1e-10 * eps.max(1e-10));
        }

        #[test]
        fn entropy_symmetric_and_concave(p in 0.0..1.0f64, q in 0.0..1.0f64) {
            let s = |x| shannon_entropy(x).unwrap();
            prop_assert!((s(p) - s(1.0 - p)).abs() < 1e-12);
            prop_assert!(s(0.5 * (p + q)) + 1e-12 >= 0.5 * (s(p) + s(q)));
        }
    }
}
