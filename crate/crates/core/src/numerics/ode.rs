use super::{NumericsError, OdeConfig};

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th- and 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const PI_BETA: f64 = 0.04;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// Piecewise polynomial solution of an IVP over `[t_start, t_end]`.
///
/// Each accepted step stores five coefficient blocks of the Dormand–Prince
/// continuous extension; queries at step boundaries return the stored step
/// values exactly. Immutable once built.
#[derive(Clone)]
pub struct DenseSolution {
    dim: usize,
    t_start: f64,
    starts: Vec<f64>,
    widths: Vec<f64>,
    coeffs: Vec<f64>,
    y_start: Vec<f64>,
    y_end: Vec<f64>,
}

impl std::fmt::Debug for DenseSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseSolution")
            .field("dim", &self.dim)
            .field("t_start", &self.t_start)
            .field("t_end", &self.t_end())
            .field("steps", &self.steps())
            .field("y_end", &self.y_end)
            .finish()
    }
}

impl DenseSolution {
    fn new(t0: f64, y0: &[f64]) -> Self {
        Self {
            dim: y0.len(),
            t_start: t0,
            starts: Vec::new(),
            widths: Vec::new(),
            coeffs: Vec::new(),
            y_start: y0.to_vec(),
            y_end: y0.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    /// Last time reached (equals `t1` on success).
    pub fn t_end(&self) -> f64 {
        match (self.starts.last(), self.widths.last()) {
            (Some(s), Some(w)) => s + w,
            _ => self.t_start,
        }
    }

    pub fn steps(&self) -> usize {
        self.starts.len()
    }

    pub fn final_state(&self) -> &[f64] {
        &self.y_end
    }

    /// Times of the accepted step boundaries, including both ends.
    pub fn step_times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.starts.len() + 1);
        out.push(self.t_start);
        out.extend(self.starts.iter().zip(&self.widths).map(|(s, w)| s + w));
        if let Some(last) = out.last_mut() {
            *last = self.t_end();
        }
        out
    }

    fn block(&self, step: usize, k: usize) -> &[f64] {
        let base = (step * 5 + k) * self.dim;
        &self.coeffs[base..base + self.dim]
    }

    /// State at `t`, clamped to the covered interval.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.dim, "output buffer has the wrong dimension");
        if self.starts.is_empty() || t <= self.t_start {
            out.copy_from_slice(&self.y_start);
            return;
        }
        if t >= self.t_end() {
            out.copy_from_slice(&self.y_end);
            return;
        }
        // last step whose start is <= t
        let step = self.starts.partition_point(|&s| s <= t) - 1;
        let theta = (t - self.starts[step]) / self.widths[step];
        let theta1 = 1.0 - theta;
        let (r1, r2, r3, r4, r5) = (
            self.block(step, 0),
            self.block(step, 1),
            self.block(step, 2),
            self.block(step, 3),
            self.block(step, 4),
        );
        for i in 0..self.dim {
            out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
        }
    }
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], cfg: &OdeConfig) -> f64 {
    let n = y0.len() as f64;
    let sum: f64 = y0
        .iter()
        .zip(y1)
        .zip(err)
        .map(|((a, b), e)| {
            let scale = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            (e / scale).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t1` with adaptive steps.
///
/// `rhs` writes the derivative into its third argument. On failure the error
/// carries the trajectory up to the last accepted step.
pub fn solve_ivp<F>(mut rhs: F, t0: f64, t1: f64, y0: &[f64], cfg: &OdeConfig) -> Result<DenseSolution, NumericsError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    cfg.validate()?;
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(NumericsError::InvalidInterval { a: t0, b: t1 });
    }
    let n = y0.len();
    let mut sol = DenseSolution::new(t0, y0);
    if t1 == t0 || n == 0 {
        return Ok(sol);
    }

    let span = t1 - t0;
    let h_max = cfg.max_step * span;
    let mut h = (cfg.initial_step * span).min(h_max);

    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];

    rhs(t, &y, &mut k1);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut attempts = 0usize;

    while t < t1 {
        if attempts >= cfg.max_steps {
            return Err(NumericsError::MaxStepsExceeded {
                t,
                steps: attempts,
                partial: Box::new(sol),
            });
        }
        attempts += 1;

        // absorb a rounding-sized remainder into this step instead of taking
        // a separate sliver step
        let last = t1 - (t + h) <= 64.0 * f64::EPSILON * t1.abs().max(span);
        if last {
            h = t1 - t;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(span) {
            return Err(NumericsError::StepSizeUnderflow {
                t,
                h,
                partial: Box::new(sol),
            });
        }

        for i in 0..n {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &stage, &mut k2);
        for i in 0..n {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &stage, &mut k3);
        for i in 0..n {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &stage, &mut k4);
        for i in 0..n {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &stage, &mut k5);
        for i in 0..n {
            stage[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t1 } else { t + h };
        rhs(t_new, &stage, &mut k6);
        for i in 0..n {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(t_new, &y_new, &mut k7);
        for i in 0..n {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }

        let norm = error_norm(&y, &y_new, &err, cfg);
        if !norm.is_finite() {
            h *= MIN_FACTOR;
            last_rejected = true;
            continue;
        }

        let fac11 = norm.powf(0.2 - PI_BETA * 0.75);
        if norm <= 1.0 {
            let fac = (fac11 / fac_old.powf(PI_BETA) / SAFETY).clamp(1.0 / MAX_FACTOR, 1.0 / MIN_FACTOR);
            fac_old = norm.max(1e-4);

            sol.starts.push(t);
            sol.widths.push(t_new - t);
            for i in 0..n {
                let diff = y_new[i] - y[i];
                let bspl = h * k1[i] - diff;
                sol.coeffs.push(y[i]);
                stage[i] = diff;
                err[i] = bspl;
            }
            sol.coeffs.extend_from_slice(&stage);
            sol.coeffs.extend_from_slice(&err);
            for i in 0..n {
                sol.coeffs.push(stage[i] - h * k7[i] - err[i]);
            }
            for i in 0..n {
                sol.coeffs
                    .push(h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]));
            }

            t = t_new;
            y.copy_from_slice(&y_new);
            sol.y_end.copy_from_slice(&y_new);
            std::mem::swap(&mut k1, &mut k7);

            let mut h_new = (h / fac).min(h_max);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(1.0 / MIN_FACTOR);
            last_rejected = true;
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_decay() {
        let sol = solve_ivp(|_, y, dy| dy[0] = -y[0], 0.0, 1.0, &[1.0], &OdeConfig::default()).unwrap();
        assert_abs_diff_eq!(sol.final_state()[0], (-1f64).exp(), epsilon = 1e-8);
        assert_eq!(sol.t_end(), 1.0);
    }

    #[test]
    fn constant_solution_is_preserved() {
        let sol = solve_ivp(|_, _, dy| dy[0] = 0.0, 0.0, 5.0, &[3.25], &OdeConfig::default()).unwrap();
        for k in 0..=50 {
            assert_eq!(sol.eval(k as f64 * 0.1)[0], 3.25);
        }
    }

    #[test]
    fn quadrature_of_linear_rhs() {
        let sol = solve_ivp(|t, _, dy| dy[0] = 2.0 * t, 0.0, 1.0, &[0.0], &OdeConfig::default()).unwrap();
        assert_abs_diff_eq!(sol.final_state()[0], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn dense_output_matches_analytic_between_steps() {
        // harmonic oscillator
        let cfg = OdeConfig::with_tolerances(1e-10, 1e-12);
        let sol = solve_ivp(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            10.0,
            &[0.0, 1.0],
            &cfg,
        )
        .unwrap();
        for k in 0..=997 {
            let t = k as f64 * 0.010_03;
            let y = sol.eval(t);
            assert_abs_diff_eq!(y[0], t.sin(), epsilon = 1e-8);
            assert_abs_diff_eq!(y[1], t.cos(), epsilon = 1e-8);
        }
    }

    #[test]
    fn dense_output_hits_step_points_exactly() {
        let cfg = OdeConfig::default();
        let mut states = Vec::new();
        let sol = solve_ivp(|t, y, dy| dy[0] = (t * 3.0).cos() - 0.5 * y[0], 0.0, 4.0, &[1.0], &cfg).unwrap();
        // reconstruct step values by re-evaluating boundaries
        for (i, &t) in sol.step_times().iter().enumerate() {
            let y = sol.eval(t);
            if i == 0 {
                assert_eq!(y[0], 1.0);
            }
            states.push(y[0]);
        }
        assert_eq!(*states.last().unwrap(), sol.final_state()[0]);
        // interior boundaries are the exact stored step-start values
        for step in 0..sol.steps() {
            assert_eq!(sol.eval(sol.starts[step])[0], sol.block(step, 0)[0]);
        }
    }

    #[test]
    fn dense_interpolant_is_fourth_order() {
        // fixed number of steps via a tiny max_step: halving h should cut the
        // midpoint interpolation error by roughly 2^5 (local order 5)
        let midpoint_error = |max_step: f64| {
            let cfg = OdeConfig {
                rel_tol: 1.0,
                abs_tol: 1.0,
                initial_step: max_step,
                max_steps: 1_000_000,
                max_step,
            };
            let sol = solve_ivp(|_, y, dy| dy[0] = y[0], 0.0, 1.0, &[1.0], &cfg).unwrap();
            let t = 0.5 * max_step;
            (sol.eval(t)[0] - t.exp()).abs()
        };
        let coarse = midpoint_error(0.1);
        let fine = midpoint_error(0.05);
        assert!(coarse / fine > 16.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn max_steps_reports_partial_trajectory() {
        let cfg = OdeConfig {
            max_steps: 10,
            ..OdeConfig::default()
        };
        match solve_ivp(|_, y, dy| dy[0] = -y[0], 0.0, 1.0, &[1.0], &cfg) {
            Err(NumericsError::MaxStepsExceeded { partial, steps, .. }) => {
                assert_eq!(steps, 10);
                assert!(partial.t_end() > 0.0 && partial.t_end() < 1.0);
            }
            other => panic!("expected max-steps failure, got {other:?}"),
        }
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y², y(0) = 1 blows up at t = 1
        let err = solve_ivp(|_, y, dy| dy[0] = y[0] * y[0], 0.0, 2.0, &[1.0], &OdeConfig::default()).unwrap_err();
        match err {
            NumericsError::StepSizeUnderflow { partial, .. } | NumericsError::MaxStepsExceeded { partial, .. } => {
                assert!(partial.t_end() < 1.0 + 1e-6);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn step_cap_is_respected() {
        let sol = solve_ivp(|_, _, dy| dy[0] = 1.0, 0.0, 1.0, &[0.0], &OdeConfig::default()).unwrap();
        assert!(sol.steps() >= 100);
        assert!(sol.widths.iter().all(|&w| w <= 0.01 + 1e-15));
    }
}
