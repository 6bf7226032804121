//! Finite-time erasure dynamics.
//!
//! The excited population obeys `ṗ = γ(λ)[n(λ) − (2n(λ) + 1) p]`, equivalently
//! `ṗ = Γ(λ)(p_eq(λ) − p)` with `Γ = γ₀ λ^α coth(βλ/2)`. The integrator runs
//! in physical time on the augmented state
//!
//! ```text
//! δ  = p − p_eq(λ)         δ'  = −Γ δ − (∂p_eq/∂λ) λ̇
//! W  (drive work)          W'  = λ̇ (2p − 1) / 2
//! W_ir                     W_ir' = λ̇ δ
//! ```
//!
//! so both work integrals inherit the step-size control of the population.
//!
//! For `α < 1` the rate `Γ` diverges at `λ = 0`. Such runs (and any run whose
//! protocol has an infinite slope at `t̃ = 0`) begin at the later of `t_seed`
//! and the time where `βλ` reaches [`START_SPACING`], with the population held
//! at its initial value before that; the work done along the held segment is
//! added in closed form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{solve_ivp, OdeConfig};
use crate::protocol::{Protocol, SEED_TIME};
use crate::table::Table;
use crate::thermo::{dissipation_shape, gibbs_excited, gibbs_excited_slope, BathSpectrum, ErasureTask};

/// `βλ` below which a singular-rate (`α < 1`) run keeps the population
/// frozen. The rate there is `≳ 2·10⁴ γ₀`, so the true population is
/// indistinguishable from equilibrium, and the frozen segment contributes at
/// most `β λ²/8 ≈ 1.3·10⁻⁹/β` of irreversible work.
pub const START_SPACING: f64 = 1e-4;

/// Number of uniformly spaced `t̃` points reported in a [`TrajectoryResult`].
pub const OUTPUT_POINTS: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    p_e0: f64,
}

impl InitialState {
    pub fn new(p_e0: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p_e0) {
            Ok(Self { p_e0 })
        } else {
            Err(Error::domain(
                "InitialState::new",
                format!("p_e0 must lie in [0, 1], got {p_e0}"),
            ))
        }
    }

    pub fn p_e0(&self) -> f64 {
        self.p_e0
    }
}

/// The maximally mixed state.
impl Default for InitialState {
    fn default() -> Self {
        Self { p_e0: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub protocol: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma0: f64,
    pub tau: f64,
    pub times: Vec<f64>,
    pub t_tilde: Vec<f64>,
    pub lambda: Vec<f64>,
    pub populations: Vec<f64>,
    pub p_eq: Vec<f64>,
    /// Cumulative drive work.
    pub w_cum: Vec<f64>,
    /// Cumulative irreversible work.
    pub wir_cum: Vec<f64>,
    pub work_drive: f64,
    /// Quasi-static reset of the spacing from `λ(1)` back to `λ(0)`.
    pub work_reset: f64,
    pub work_total: f64,
    pub irr_work: f64,
    pub achieved_error: f64,
    pub target_error: f64,
    /// Accepted integrator steps.
    pub steps: usize,
}

/// Scalar part of a [`TrajectoryResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub protocol: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma0: f64,
    pub tau: f64,
    pub work_drive: f64,
    pub work_reset: f64,
    pub work_total: f64,
    pub irr_work: f64,
    pub achieved_error: f64,
    pub target_error: f64,
    pub steps: usize,
}

impl TrajectoryResult {
    pub fn summary(&self) -> TrajectorySummary {
        TrajectorySummary {
            protocol: self.protocol.clone(),
            alpha: self.alpha,
            beta: self.beta,
            gamma0: self.gamma0,
            tau: self.tau,
            work_drive: self.work_drive,
            work_reset: self.work_reset,
            work_total: self.work_total,
            irr_work: self.irr_work,
            achieved_error: self.achieved_error,
            target_error: self.target_error,
            steps: self.steps,
        }
    }

    pub fn to_table(&self) -> Table {
        let mut table = Table::new(
            "trajectory",
            &["t", "t_tilde", "lambda", "p_e", "p_eq", "w_cum", "wir_cum"],
        );
        for i in 0..self.times.len() {
            table.push(vec![
                self.times[i],
                self.t_tilde[i],
                self.lambda[i],
                self.populations[i],
                self.p_eq[i],
                self.w_cum[i],
                self.wir_cum[i],
            ]);
        }
        table
    }

    pub fn write_csv<W: Write>(&self, out: W, provenance: Option<&str>) -> Result<()> {
        self.to_table().write_csv(out, provenance)
    }

    pub fn write_summary_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.summary())?;
        Ok(())
    }
}

/// `ln((1 + e^x)/2)` without overflow.
fn log_mean_exp1(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p() - std::f64::consts::LN_2
    } else {
        x.exp().ln_1p() - std::f64::consts::LN_2
    }
}

/// Drive and irreversible work accumulated while `λ` rises from `0` to
/// `lambda` with the population frozen at `p0`.
fn held_segment_work(lambda: f64, beta: f64, p0: f64) -> (f64, f64) {
    // ∫₀^λ p_eq dλ' = λ − ln((1 + e^{βλ})/2)/β
    let drive = (p0 - 0.5) * lambda;
    let irr = (p0 - 1.0) * lambda + log_mean_exp1(beta * lambda) / beta;
    (drive, irr)
}

/// Smallest `t̃` (to bisection accuracy) with `λ(t̃) ≥ target`, for a
/// non-decreasing protocol.
fn spacing_onset(protocol: &Protocol, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if protocol.lambda(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Integrates the master equation under `protocol` for duration `task.tau()`.
pub fn simulate(
    protocol: &Protocol,
    task: &ErasureTask,
    spectrum: &BathSpectrum,
    init: InitialState,
    cfg: &OdeConfig,
) -> Result<TrajectoryResult> {
    let beta = task.beta();
    let tau = task.tau();
    let p0 = init.p_e0();
    let lambda_0 = protocol.lambda(0.0);
    if !(lambda_0.is_finite() && lambda_0 >= 0.0 && protocol.lambda(1.0).is_finite()) {
        return Err(Error::domain("simulate", "protocol must be finite and non-negative"));
    }

    let finite_start = spectrum.relaxation_rate(lambda_0, beta).is_finite() && protocol.derivative(0.0).is_finite();
    let t_tilde_start = if finite_start {
        0.0
    } else {
        let seed = protocol.seed_time().unwrap_or(SEED_TIME);
        if lambda_0 > 0.0 || !(protocol.lambda(1.0) > 0.0) {
            return Err(Error::domain(
                "simulate",
                format!("relaxation rate is singular along the protocol near t/tau = {seed}"),
            ));
        }
        seed.max(spacing_onset(
            protocol,
            (START_SPACING / beta).min(0.5 * protocol.lambda(1.0)),
        ))
    };

    let lambda_start = protocol.lambda(t_tilde_start);
    let (held_drive, held_irr) = if t_tilde_start > 0.0 {
        held_segment_work(lambda_start, beta, p0)
    } else {
        (0.0, 0.0)
    };
    let y0 = [p0 - gibbs_excited(beta * lambda_start), held_drive, held_irr];

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let s = t / tau;
        let lambda = protocol.lambda(s);
        let lambda_dot = protocol.derivative(s) / tau;
        let p = y[0] + gibbs_excited(beta * lambda);
        dy[0] = -spectrum.relaxation_rate(lambda, beta) * y[0] - gibbs_excited_slope(lambda, beta) * lambda_dot;
        dy[1] = 0.5 * lambda_dot * (2.0 * p - 1.0);
        dy[2] = lambda_dot * y[0];
    };
    let solution = solve_ivp(rhs, t_tilde_start * tau, tau, &y0, cfg)?;

    let n = OUTPUT_POINTS - 1;
    let mut result = TrajectoryResult {
        protocol: protocol.kind().label(),
        alpha: spectrum.alpha(),
        beta,
        gamma0: spectrum.gamma0(),
        tau,
        times: Vec::with_capacity(OUTPUT_POINTS),
        t_tilde: Vec::with_capacity(OUTPUT_POINTS),
        lambda: Vec::with_capacity(OUTPUT_POINTS),
        populations: Vec::with_capacity(OUTPUT_POINTS),
        p_eq: Vec::with_capacity(OUTPUT_POINTS),
        w_cum: Vec::with_capacity(OUTPUT_POINTS),
        wir_cum: Vec::with_capacity(OUTPUT_POINTS),
        work_drive: 0.0,
        work_reset: 0.0,
        work_total: 0.0,
        irr_work: 0.0,
        achieved_error: 0.0,
        target_error: task.epsilon(),
        steps: solution.steps(),
    };
    let mut state = [0.0; 3];
    for k in 0..=n {
        let s = k as f64 / n as f64;
        let lambda = protocol.lambda(s);
        let p_eq = gibbs_excited(beta * lambda);
        let (p, w, wir) = if s < t_tilde_start {
            let (w, wir) = held_segment_work(lambda, beta, p0);
            (p0, w, wir)
        } else {
            solution.eval_into(s * tau, &mut state);
            (state[0] + p_eq, state[1], state[2])
        };
        result.times.push(s * tau);
        result.t_tilde.push(s);
        result.lambda.push(lambda);
        result.populations.push(p);
        result.p_eq.push(p_eq);
        result.w_cum.push(w);
        result.wir_cum.push(wir);
    }

    let end = solution.final_state();
    let lambda_end = protocol.lambda(1.0);
    let p_end = end[0] + gibbs_excited(beta * lambda_end);
    result.work_drive = end[1];
    result.irr_work = end[2];
    result.work_reset = (p_end - 0.5) * (lambda_0 - lambda_end);
    result.work_total = result.work_drive + result.work_reset;
    result.achieved_error = p_end;
    Ok(result)
}

/// First-order slow-driving population
/// `p_eq(λ) − (1 − 2p_eq)/γ(λ) · ∂p_eq/∂λ · λ̇`.
///
/// Requires `λ > 0` and is only meaningful while `γ(λ) τ ≫ 1`.
pub fn slow_driving_population(lambda: f64, lambda_dot: f64, task: &ErasureTask, spectrum: &BathSpectrum) -> f64 {
    let beta = task.beta();
    let p = gibbs_excited(beta * lambda);
    p - (1.0 - 2.0 * p) / spectrum.dissipation(lambda) * gibbs_excited_slope(lambda, beta) * lambda_dot
}

/// Slow-driving irreversible power
/// `β/γ(λ) · (1 − e^{−βλ})e^{−βλ}/(1 + e^{−βλ})³ · λ̇²`. Requires `λ > 0`.
pub fn irreversible_power_slow(lambda: f64, lambda_dot: f64, task: &ErasureTask, spectrum: &BathSpectrum) -> f64 {
    let beta = task.beta();
    beta / spectrum.dissipation(lambda) * dissipation_shape(beta * lambda) * lambda_dot * lambda_dot
}
