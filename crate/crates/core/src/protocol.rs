//! Driving schedules `λ(t̃)` on the normalized time `t̃ = t/τ ∈ [0, 1]`.
//!
//! Closed-form schedules (linear, power law) are evaluated directly. The
//! optimal schedule keeps the slow-driving dissipation rate constant, i.e. it
//! solves
//!
//! ```text
//! dλ/dt̃ = L(ε) [β (1 − e^{−βλ}) e^{−βλ} / (γ₀ λ^α (1 + e^{−βλ})³)]^{−1/2}
//! ```
//!
//! from `λ(0) = 0`. Because `L(ε)` is exactly the integral of the inverse of
//! this rate from `0` to `λ_m`, the IVP arrives at `λ_m` at `t̃ = 1`; the
//! arrival is checked rather than solved for. The right-hand side is singular
//! or vanishing at `λ = 0`, so integration starts at [`SEED_TIME`] from the
//! small-`t̃` solution `λ = [2(3−α)² γ₀ L²/β²]^{1/(3−α)} t̃^{2/(3−α)}`.
//!
//! Tabulated schedules are piecewise cubic Hermite with monotonicity-limited
//! slopes, so values and derivatives are available at any `t̃`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{f_alpha, length_scale};
use crate::numerics::{solve_ivp, DenseSolution, OdeConfig, QuadratureConfig};
use crate::table::Table;
use crate::thermo::{dissipation_shape, BathSpectrum, ErasureTask};

/// Normalized time at which the optimal-protocol IVP takes over from the
/// analytic small-`t̃` solution.
pub const SEED_TIME: f64 = 1e-6;

const SEED_REGION_END: f64 = 1e-2;
const SEED_REGION_SAMPLES: usize = 160;
const BULK_SAMPLES: usize = 1000;
const MAX_REFINE_PASSES: usize = 40;
const MAX_NODES: usize = 1 << 17;
const CLOSED_FORM_EXPORT_SAMPLES: usize = 513;
const CLOSED_FORM_FIT_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProtocolKind {
    Linear,
    Power {
        exponent: f64,
    },
    Optimal {
        alpha: f64,
        epsilon: f64,
    },
    Sampled,
    /// Constant spacing; a relaxation probe rather than an erasure schedule.
    Hold,
}

impl ProtocolKind {
    pub fn label(&self) -> String {
        match self {
            ProtocolKind::Linear => "linear".to_owned(),
            ProtocolKind::Power { exponent } => format!("power({exponent})"),
            ProtocolKind::Optimal { .. } => "optimal".to_owned(),
            ProtocolKind::Sampled => "sampled".to_owned(),
            ProtocolKind::Hold => "hold".to_owned(),
        }
    }
}

/// `λ = prefactor · t̃^exponent` for `t̃` below `t_seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Seed {
    t_seed: f64,
    prefactor: f64,
    exponent: f64,
}

impl Seed {
    fn value(&self, t: f64) -> f64 {
        self.prefactor * t.powf(self.exponent)
    }

    fn derivative(&self, t: f64) -> f64 {
        if t == 0.0 {
            return match self.exponent.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => self.prefactor,
                _ => 0.0,
            };
        }
        self.prefactor * self.exponent * t.powf(self.exponent - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Hermite {
    t: Vec<f64>,
    lambda: Vec<f64>,
    slope: Vec<f64>,
    seed: Option<Seed>,
}

impl Hermite {
    fn segment(&self, t: f64) -> usize {
        let n = self.t.len();
        (self.t.partition_point(|&x| x <= t).max(1) - 1).min(n - 2)
    }

    fn value(&self, t: f64) -> f64 {
        if let Some(seed) = self.seed {
            if t < self.t[0] {
                return seed.value(t);
            }
        }
        let i = self.segment(t);
        hermite_value(
            self.t[i],
            self.t[i + 1],
            self.lambda[i],
            self.lambda[i + 1],
            self.slope[i],
            self.slope[i + 1],
            t,
        )
    }

    fn derivative(&self, t: f64) -> f64 {
        if let Some(seed) = self.seed {
            if t < self.t[0] {
                return seed.derivative(t);
            }
        }
        let i = self.segment(t);
        hermite_derivative(
            self.t[i],
            self.t[i + 1],
            self.lambda[i],
            self.lambda[i + 1],
            self.slope[i],
            self.slope[i + 1],
            t,
        )
    }
}

fn hermite_value(t0: f64, t1: f64, y0: f64, y1: f64, m0: f64, m1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * m1
}

fn hermite_derivative(t0: f64, t1: f64, y0: f64, y1: f64, m0: f64, m1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    (6.0 * s2 - 6.0 * s) * (y0 - y1) / h + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (3.0 * s2 - 2.0 * s) * m1
}

/// Fritsch–Carlson limiter: clamps slopes so every cubic piece is monotone.
fn limit_slopes(t: &[f64], y: &[f64], m: &mut [f64]) {
    for i in 0..t.len() - 1 {
        let delta = (y[i + 1] - y[i]) / (t[i + 1] - t[i]);
        if delta == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = (m[i] / delta).max(0.0);
        let b = (m[i + 1] / delta).max(0.0);
        let r = a.hypot(b);
        let (a, b) = if r > 3.0 { (3.0 * a / r, 3.0 * b / r) } else { (a, b) };
        m[i] = a * delta;
        m[i + 1] = b * delta;
    }
}

/// Shape-preserving (PCHIP) slopes for raw samples.
fn pchip_slopes(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = y.windows(2).zip(&h).map(|(w, h)| (w[1] - w[0]) / h).collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for k in 1..n - 1 {
        if d[k - 1] * d[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    kind: ProtocolKind,
    lambda_max: f64,
    table: Option<Hermite>,
}

pub fn linear_protocol(lambda_max: f64) -> Result<Protocol> {
    check_lambda_max(lambda_max)?;
    Ok(Protocol {
        kind: ProtocolKind::Linear,
        lambda_max,
        table: None,
    })
}

pub fn power_protocol(lambda_max: f64, exponent: f64) -> Result<Protocol> {
    check_lambda_max(lambda_max)?;
    if !(exponent.is_finite() && exponent > 0.0) {
        return Err(Error::domain(
            "power_protocol",
            format!("exponent must be > 0, got {exponent}"),
        ));
    }
    Ok(Protocol {
        kind: ProtocolKind::Power { exponent },
        lambda_max,
        table: None,
    })
}

fn check_lambda_max(lambda_max: f64) -> Result<()> {
    if lambda_max.is_finite() && lambda_max >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            "protocol",
            format!("lambda_max must be finite and >= 0, got {lambda_max}"),
        ))
    }
}

/// Slow-driving dissipation metric `g(λ)` divided out of the optimal-protocol
/// equation: returns `dλ/dt̃ = L / √g(λ)`.
struct Geodesic {
    length: f64,
    alpha: f64,
    beta: f64,
    gamma0: f64,
}

impl Geodesic {
    fn rate(&self, lambda: f64) -> f64 {
        let lambda = lambda.max(0.0);
        let metric = self.beta * dissipation_shape(self.beta * lambda) / (self.gamma0 * lambda.powf(self.alpha));
        self.length / metric.sqrt()
    }
}

/// Constant-dissipation (geodesic) schedule for `task` and `spectrum`.
///
/// The result depends on `τ` only through `t̃`, so the same table serves any
/// duration.
pub fn optimal_protocol(task: &ErasureTask, spectrum: &BathSpectrum, cfg: &OdeConfig) -> Result<Protocol> {
    let alpha = spectrum.alpha();
    if alpha >= 3.0 {
        return Err(Error::domain(
            "optimal_protocol",
            format!("the small-time solution requires alpha < 3, got {alpha}"),
        ));
    }
    let beta = task.beta();
    let epsilon = task.epsilon();
    let lambda_max = task.lambda_max();
    let kind = ProtocolKind::Optimal { alpha, epsilon };
    if lambda_max == 0.0 {
        return Ok(Protocol {
            kind,
            lambda_max,
            table: None,
        });
    }

    let f = f_alpha(epsilon, alpha, &QuadratureConfig::default())?;
    let length = length_scale(alpha, beta, spectrum.gamma0()) * f;
    let geodesic = Geodesic {
        length,
        alpha,
        beta,
        gamma0: spectrum.gamma0(),
    };
    let exponent = 2.0 / (3.0 - alpha);
    let prefactor =
        (2.0 * (3.0 - alpha).powi(2) * spectrum.gamma0() * length * length / (beta * beta)).powf(1.0 / (3.0 - alpha));
    let seed = Seed {
        t_seed: SEED_TIME,
        prefactor,
        exponent,
    };

    let solution = solve_ivp(
        |_, y, dy| dy[0] = geodesic.rate(y[0]),
        SEED_TIME,
        1.0,
        &[seed.value(SEED_TIME)],
        cfg,
    )?;

    let achieved = solution.final_state()[0];
    let tolerance = 1e-4 * lambda_max.max(1.0 / beta);
    if !((achieved - lambda_max).abs() <= tolerance) {
        return Err(Error::EndpointMismatch {
            achieved,
            expected: lambda_max,
            tolerance,
        });
    }

    let table = tabulate_geodesic(&solution, &geodesic, seed, lambda_max.max(1.0 / beta));
    Ok(Protocol {
        kind,
        lambda_max,
        table: Some(table),
    })
}

/// Samples the IVP solution on a log grid near the seed and a uniform grid
/// elsewhere, then bisects every interval whose Hermite midpoint disagrees
/// with the IVP solution.
fn tabulate_geodesic(solution: &DenseSolution, geodesic: &Geodesic, seed: Seed, scale: f64) -> Hermite {
    let mut nodes: Vec<f64> = Vec::with_capacity(SEED_REGION_SAMPLES + BULK_SAMPLES + 1);
    let log_lo = SEED_TIME.ln();
    let log_hi = SEED_REGION_END.ln();
    for k in 0..SEED_REGION_SAMPLES {
        nodes.push((log_lo + (log_hi - log_lo) * k as f64 / SEED_REGION_SAMPLES as f64).exp());
    }
    for k in 0..=BULK_SAMPLES {
        nodes.push(SEED_REGION_END + (1.0 - SEED_REGION_END) * k as f64 / BULK_SAMPLES as f64);
    }
    nodes[0] = SEED_TIME;
    *nodes.last_mut().unwrap() = 1.0;

    let sample = |t: f64| {
        let lambda = solution.eval(t)[0];
        (lambda, geodesic.rate(lambda))
    };
    let mut values: Vec<(f64, f64)> = nodes.iter().map(|&t| sample(t)).collect();
    let value_floor = 1e-14 * scale;

    for _ in 0..MAX_REFINE_PASSES {
        let mut next_nodes = Vec::with_capacity(nodes.len());
        let mut next_values = Vec::with_capacity(nodes.len());
        let mut refined = false;
        for i in 0..nodes.len() - 1 {
            next_nodes.push(nodes[i]);
            next_values.push(values[i]);
            let (t0, t1) = (nodes[i], nodes[i + 1]);
            let ((y0, m0), (y1, m1)) = (values[i], values[i + 1]);
            let mid = 0.5 * (t0 + t1);
            let (y_mid, m_mid) = sample(mid);
            let value_err = (hermite_value(t0, t1, y0, y1, m0, m1, mid) - y_mid).abs();
            // the cubic's slope error vanishes at the midpoint and peaks near
            // the quarter points
            let quarter = t0 + 0.25 * (t1 - t0);
            let (y_q, m_q) = sample(quarter);
            let slope_err = (hermite_derivative(t0, t1, y0, y1, m0, m1, quarter) - m_q).abs();
            // the second slope term is the difference quotient of the IVP's own
            // value noise; without it bisection would chase rounding forever
            let value_tol = 1e-8 * y_mid.abs() + value_floor;
            let slope_tol = 1e-6 * m_q.abs() + 10.0 * (1e-10 * y_q.abs() + value_floor) / (t1 - t0);
            if (value_err > value_tol || slope_err > slope_tol) && mid > t0 && mid < t1 && nodes.len() < MAX_NODES {
                next_nodes.push(mid);
                next_values.push((y_mid, m_mid));
                refined = true;
            }
        }
        next_nodes.push(*nodes.last().unwrap());
        next_values.push(*values.last().unwrap());
        nodes = next_nodes;
        values = next_values;
        if !refined {
            break;
        }
    }

    let lambda: Vec<f64> = values.iter().map(|v| v.0).collect();
    let mut slope: Vec<f64> = values.iter().map(|v| v.1).collect();
    limit_slopes(&nodes, &lambda, &mut slope);
    Hermite {
        t: nodes,
        lambda,
        slope,
        seed: Some(seed),
    }
}

impl Protocol {
    /// Constant spacing `λ_c`. Violates `λ(0) = 0`; used to probe relaxation.
    pub fn hold(lambda: f64) -> Result<Self> {
        check_lambda_max(lambda)?;
        Ok(Self {
            kind: ProtocolKind::Hold,
            lambda_max: lambda,
            table: None,
        })
    }

    /// Schedule through user samples `(t̃_i, λ_i)` with PCHIP interpolation.
    /// Requires `t̃` strictly increasing from `0` to `1`, `λ(0) = 0` and
    /// non-decreasing `λ`.
    pub fn from_samples(t: &[f64], lambda: &[f64]) -> Result<Self> {
        if t.len() != lambda.len() || t.len() < 2 {
            return Err(Error::domain(
                "Protocol::from_samples",
                "need at least two (t, lambda) pairs of equal length",
            ));
        }
        if t[0] != 0.0 || *t.last().unwrap() != 1.0 || t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(
                "Protocol::from_samples",
                "t must increase strictly from 0 to 1",
            ));
        }
        if lambda[0] != 0.0 || lambda.windows(2).any(|w| !(w[1] >= w[0])) || lambda.iter().any(|l| !l.is_finite()) {
            return Err(Error::domain(
                "Protocol::from_samples",
                "lambda must start at 0 and be non-decreasing",
            ));
        }
        let mut slope = pchip_slopes(t, lambda);
        limit_slopes(t, lambda, &mut slope);
        Ok(Self {
            kind: ProtocolKind::Sampled,
            lambda_max: *lambda.last().unwrap(),
            table: Some(Hermite {
                t: t.to_vec(),
                lambda: lambda.to_vec(),
                slope,
                seed: None,
            }),
        })
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// `λ(t̃)`, with `t̃` clamped to `[0, 1]`.
    pub fn lambda(&self, t_tilde: f64) -> f64 {
        let t = t_tilde.clamp(0.0, 1.0);
        if let Some(table) = &self.table {
            return table.value(t);
        }
        match self.kind {
            ProtocolKind::Linear => self.lambda_max * t,
            ProtocolKind::Power { exponent } => self.lambda_max * t.powf(exponent),
            ProtocolKind::Hold => self.lambda_max,
            // degenerate (λ_m = 0) optimal protocol
            ProtocolKind::Optimal { .. } | ProtocolKind::Sampled => 0.0,
        }
    }

    /// `dλ/dt̃`. May be infinite at `t̃ = 0` (e.g. the `α = 0` optimal
    /// schedule grows like `t̃^{2/3}`).
    pub fn derivative(&self, t_tilde: f64) -> f64 {
        let t = t_tilde.clamp(0.0, 1.0);
        if let Some(table) = &self.table {
            return table.derivative(t);
        }
        match self.kind {
            ProtocolKind::Linear => self.lambda_max,
            ProtocolKind::Power { exponent } => {
                if t == 0.0 {
                    if exponent < 1.0 {
                        f64::INFINITY
                    } else if exponent == 1.0 {
                        self.lambda_max
                    } else {
                        0.0
                    }
                } else {
                    self.lambda_max * exponent * t.powf(exponent - 1.0)
                }
            }
            ProtocolKind::Hold | ProtocolKind::Optimal { .. } | ProtocolKind::Sampled => 0.0,
        }
    }

    /// Earliest `t̃` from which the schedule is tabulated rather than seeded.
    pub fn seed_time(&self) -> Option<f64> {
        self.table.as_ref().and_then(|t| t.seed).map(|s| s.t_seed)
    }

    /// Interpolation nodes `(t̃, λ)` of tabulated schedules.
    pub fn nodes(&self) -> Option<Vec<(f64, f64)>> {
        self.table
            .as_ref()
            .map(|t| t.t.iter().copied().zip(t.lambda.iter().copied()).collect())
    }

    /// Rows `(t̃, λ, dλ/dt̃)`: the nodes for tabulated schedules (preceded by
    /// `t̃ = 0` when the derivative there is finite), a uniform grid otherwise.
    pub fn samples(&self) -> Vec<[f64; 3]> {
        let grid: Vec<f64> = match &self.table {
            Some(table) => {
                let mut g = Vec::with_capacity(table.t.len() + 1);
                if table.t[0] > 0.0 && self.derivative(0.0).is_finite() {
                    g.push(0.0);
                }
                g.extend_from_slice(&table.t);
                g
            }
            None => {
                let n = CLOSED_FORM_EXPORT_SAMPLES - 1;
                (0..=n).map(|k| k as f64 / n as f64).collect()
            }
        };
        grid.into_iter()
            .map(|t| [t, self.lambda(t), self.derivative(t)])
            .collect()
    }

    pub fn to_table(&self) -> Table {
        let mut table = Table::new("protocol", &["t_tilde", "lambda", "dlambda_dt_tilde"]);
        for row in self.samples() {
            table.push(row.to_vec());
        }
        table
    }

    pub fn write_csv<W: Write>(&self, out: W, provenance: Option<&str>) -> Result<()> {
        self.to_table().write_csv(out, provenance)
    }
}

/// Least-squares slope of `ln λ` against `ln t̃` over `window`.
///
/// Tabulated schedules use their own nodes inside the window (at least four
/// are required); closed-form schedules are sampled on a log grid.
pub fn scaling_exponent_fit(protocol: &Protocol, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi <= 1.0) {
        return Err(Error::domain(
            "scaling_exponent_fit",
            format!("invalid window ({lo}, {hi})"),
        ));
    }
    let points: Vec<(f64, f64)> = match protocol.nodes() {
        Some(nodes) => nodes.into_iter().filter(|(t, _)| *t >= lo && *t <= hi).collect(),
        None => {
            let n = CLOSED_FORM_FIT_SAMPLES;
            (0..n)
                .map(|k| {
                    let t = (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp();
                    (t, protocol.lambda(t))
                })
                .collect()
        }
    };
    if points.len() < 4 {
        return Err(Error::domain(
            "scaling_exponent_fit",
            format!("only {} sample points in window ({lo}, {hi})", points.len()),
        ));
    }
    if points.iter().any(|(_, l)| !(*l > 0.0)) {
        return Err(Error::domain(
            "scaling_exponent_fit",
            "protocol is not positive on the window",
        ));
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (t, l)| (sx + t.ln(), sy + l.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), (t, l)| {
        let dx = t.ln() - mx;
        (sxy + dx * (l.ln() - my), sxx + dx * dx)
    });
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::format_float;
    use approx::assert_abs_diff_eq;

    fn optimal(alpha: f64, epsilon: f64, tau: f64) -> Protocol {
        let task = ErasureTask::new(1.0, epsilon, tau).unwrap();
        let spectrum = BathSpectrum::new(alpha, 1.0).unwrap();
        optimal_protocol(&task, &spectrum, &OdeConfig::default()).unwrap()
    }

    #[test]
    fn linear_examples() {
        let p = linear_protocol(99f64.ln()).unwrap();
        assert_abs_diff_eq!(p.lambda(0.5), 2.29756, epsilon = 1e-5);
        assert_eq!(p.lambda(0.0), 0.0);
        assert_eq!(p.lambda(1.0), 99f64.ln());
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(p.derivative(t), 99f64.ln());
        }
        assert!(linear_protocol(-1.0).is_err());
    }

    #[test]
    fn power_examples() {
        let p = power_protocol(3.0, 2.0).unwrap();
        assert_abs_diff_eq!(p.lambda(0.5), 0.75, epsilon = 1e-15);
        assert_eq!(p.derivative(1.0), 6.0);
        let lin = linear_protocol(3.0).unwrap();
        let p1 = power_protocol(3.0, 1.0).unwrap();
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert_eq!(p1.lambda(t), lin.lambda(t));
            assert_eq!(p1.derivative(t), lin.derivative(t));
        }
        assert!(power_protocol(3.0, 0.0).is_err());
        assert_eq!(power_protocol(3.0, 0.5).unwrap().derivative(0.0), f64::INFINITY);
    }

    #[test]
    fn power_exponent_fit() {
        let p = power_protocol(5.0, 2.0).unwrap();
        assert_abs_diff_eq!(scaling_exponent_fit(&p, (1e-4, 1e-2)).unwrap(), 2.0, epsilon = 1e-6);
        assert!(scaling_exponent_fit(&p, (1e-2, 1e-4)).is_err());
    }

    #[test]
    fn fit_needs_four_points() {
        let p = Protocol::from_samples(&[0.0, 0.5, 1.0], &[0.0, 1.0, 2.0]).unwrap();
        assert!(scaling_exponent_fit(&p, (0.1, 0.9)).is_err());
    }

    #[test]
    fn optimal_boundary_conditions() {
        for alpha in [0.0, 1.0, 2.0] {
            for eps in [1e-1, 1e-2, 1e-4, 1e-6] {
                let p = optimal(alpha, eps, 1.0);
                let lm = (1.0 / eps - 1.0).ln();
                assert_eq!(p.lambda(0.0), 0.0);
                let miss = (p.lambda(1.0) - lm).abs();
                assert!(
                    miss <= 1e-4 * lm.max(1.0),
                    "alpha={alpha} eps={eps}: {} vs {lm}",
                    p.lambda(1.0)
                );
                if eps >= 1e-4 {
                    assert!(miss <= 1e-6 * lm, "alpha={alpha} eps={eps}: {} vs {lm}", p.lambda(1.0));
                }
                assert!(p.samples().len() >= 512);
            }
        }
    }

    #[test]
    fn optimal_initial_exponents() {
        for (alpha, tol) in [(0.0, 0.02), (1.0, 0.02), (2.0, 0.04)] {
            for eps in [1e-1, 1e-2, 1e-4] {
                let p = optimal(alpha, eps, 1.0);
                let fit = scaling_exponent_fit(&p, (1e-4, 1e-2)).unwrap();
                assert_abs_diff_eq!(fit, 2.0 / (3.0 - alpha), epsilon = tol);
            }
        }
    }

    #[test]
    fn optimal_is_strictly_increasing() {
        for alpha in [0.0, 1.0, 2.0] {
            let p = optimal(alpha, 1e-4, 1.0);
            let mut last = -1.0;
            for k in 0..=20_000 {
                let v = p.lambda(k as f64 / 20_000.0);
                assert!(v > last || (k == 0 && v == 0.0));
                last = v;
            }
        }
    }

    #[test]
    fn optimal_is_tau_independent() {
        let a = optimal(1.0, 1e-4, 10.0);
        let b = optimal(1.0, 1e-4, 1000.0);
        assert_eq!(a, b);
    }

    #[test]
    fn optimal_nesting_in_error() {
        let strict = optimal(1.0, 1e-4, 1.0);
        let loose = optimal(1.0, 1e-2, 1.0);
        assert!(strict.lambda(1.0) > loose.lambda(1.0));
    }

    #[test]
    fn seed_matches_ivp_at_handoff() {
        for alpha in [0.0, 1.0, 2.0] {
            for eps in [1e-1, 1e-4] {
                let task = ErasureTask::new(1.0, eps, 1.0).unwrap();
                let spectrum = BathSpectrum::new(alpha, 1.0).unwrap();
                let p = optimal_protocol(&task, &spectrum, &OdeConfig::default()).unwrap();
                let length = f_alpha(eps, alpha, &QuadratureConfig::default()).unwrap();
                let geodesic = Geodesic {
                    length,
                    alpha,
                    beta: 1.0,
                    gamma0: 1.0,
                };
                let just_below = p.derivative(SEED_TIME * 0.999_999);
                let rhs = geodesic.rate(p.lambda(SEED_TIME));
                assert!((just_below - rhs).abs() / rhs < 0.01, "alpha={alpha}");
            }
        }
    }

    #[test]
    fn seed_prefactor_scales_with_temperature() {
        // λ·β is a function of t̃ only when γ₀ and β move together so that
        // the dimensionless length is unchanged
        for alpha in [0.0, 1.0, 2.0] {
            let base = optimal_protocol(
                &ErasureTask::new(1.0, 1e-3, 1.0).unwrap(),
                &BathSpectrum::new(alpha, 1.0).unwrap(),
                &OdeConfig::default(),
            )
            .unwrap();
            let hot = optimal_protocol(
                &ErasureTask::new(0.5, 1e-3, 1.0).unwrap(),
                &BathSpectrum::new(alpha, 3.0).unwrap(),
                &OdeConfig::default(),
            )
            .unwrap();
            for t in [1e-7, 1e-5, 1e-3, 0.1, 0.5, 1.0] {
                assert!((hot.lambda(t) * 0.5 - base.lambda(t)).abs() <= 1e-7 * base.lambda(t).max(1e-3));
            }
        }
    }

    #[test]
    fn optimal_derivative_matches_geodesic_rate() {
        for alpha in [0.0, 1.0, 2.0] {
            let eps = 1e-6;
            let p = optimal(alpha, eps, 1.0);
            let geodesic = Geodesic {
                length: f_alpha(eps, alpha, &QuadratureConfig::default()).unwrap(),
                alpha,
                beta: 1.0,
                gamma0: 1.0,
            };
            for k in 1..=4000 {
                let t = k as f64 / 4000.0 - 1.3e-5;
                let rate = geodesic.rate(p.lambda(t));
                // bounded by the dense-output accuracy of the IVP at its default tolerance
                assert!(
                    (p.derivative(t) - rate).abs() <= 1e-5 * rate,
                    "alpha={alpha} t={t}: {} vs {rate}",
                    p.derivative(t)
                );
            }
        }
    }

    #[test]
    fn degenerate_optimal_protocol() {
        let p = optimal(1.0, 0.5, 1.0);
        assert_eq!(p.lambda(0.7), 0.0);
        assert_eq!(p.lambda_max(), 0.0);
    }

    #[test]
    fn optimal_rejects_large_alpha() {
        let task = ErasureTask::new(1.0, 0.01, 1.0).unwrap();
        let spectrum = BathSpectrum::new(3.0, 1.0).unwrap();
        assert!(optimal_protocol(&task, &spectrum, &OdeConfig::default()).is_err());
    }

    #[test]
    fn endpoint_mismatch_is_reported() {
        // a loose integrator cannot land on λ_m within 1e-4
        let cfg = OdeConfig {
            rel_tol: 0.5,
            abs_tol: 0.5,
            initial_step: 0.5,
            max_steps: 1_000_000,
            max_step: 0.5,
        };
        let task = ErasureTask::new(1.0, 1e-6, 1.0).unwrap();
        let spectrum = BathSpectrum::new(1.0, 1.0).unwrap();
        match optimal_protocol(&task, &spectrum, &cfg) {
            Err(Error::EndpointMismatch { achieved, expected, .. }) => assert!(achieved != expected),
            other => panic!("expected endpoint mismatch, got {other:?}"),
        }
    }

    #[test]
    fn sampled_protocol_interpolates_monotonically() {
        let t = [0.0, 0.1, 0.2, 0.6, 1.0];
        let l = [0.0, 0.05, 1.0, 1.0, 3.0];
        let p = Protocol::from_samples(&t, &l).unwrap();
        let mut last = 0.0;
        for k in 0..=1000 {
            let v = p.lambda(k as f64 / 1000.0);
            assert!(v >= last - 1e-15);
            assert!(p.derivative(k as f64 / 1000.0) >= 0.0);
            last = v;
        }
        assert_eq!(p.lambda(0.6), 1.0);
        assert_eq!(p.lambda_max(), 3.0);
        assert!(Protocol::from_samples(&[0.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(Protocol::from_samples(&[0.0, 0.5, 1.0], &[0.0, 2.0, 1.0]).is_err());
        assert!(Protocol::from_samples(&[0.0, 0.5], &[0.0, 2.0]).is_err());
    }

    #[test]
    fn csv_export_columns() {
        let p = optimal(1.0, 1e-2, 1.0);
        let s = p.to_table().to_csv_string(None);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("t_tilde,lambda,dlambda_dt_tilde"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], format_float(0.0));
        // α = 0 has an infinite slope at the origin, so its table starts at the seed
        let p0 = optimal(0.0, 1e-2, 1.0);
        assert_eq!(p0.samples()[0][0], SEED_TIME);
        assert!(p0.samples().iter().all(|r| r[2].is_finite()));
    }
}
