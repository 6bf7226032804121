//! Named, deterministic reproduction recipes.
//!
//! Each experiment turns an [`ExperimentConfig`] into one or more [`Table`]s.
//! Grid points are independent and evaluated in parallel; results are
//! collected in grid order, so output is byte-identical across runs.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    default_epsilon_grid, default_tau_grid, parse_values, ConfigOverrides, ExperimentConfig, ExperimentName,
    OutputFormat,
};

use crate::dynamics::{simulate, InitialState};
use crate::error::Result;
use crate::geometry::{f_alpha, length_scale, scaled_tail_bound, tail_integral, thermodynamic_length};
use crate::numerics::{OdeConfig, QuadratureConfig};
use crate::protocol::{linear_protocol, optimal_protocol, power_protocol, scaling_exponent_fit, Protocol};
use crate::table::Table;
use crate::thermo::{BathSpectrum, ErasureTask};

/// `γ₀τ` below which the first-order slow-driving picture is not expected
/// to hold; rows there are reported but flagged.
pub const SLOW_DRIVING_MIN_GAMMA_TAU: f64 = 50.0;

/// Window of `t̃` used to fit the initial-stage exponent of optimal protocols.
pub const EXPONENT_FIT_WINDOW: (f64, f64) = (1e-4, 1e-2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub provenance: String,
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
}

impl ExperimentOutput {
    /// Writes every table to one stream. CSV tables are separated by a blank
    /// line and each carries the provenance comment.
    pub fn write<W: Write>(&self, format: OutputFormat, mut out: W) -> Result<()> {
        match format {
            OutputFormat::Csv => {
                for (i, table) in self.tables.iter().enumerate() {
                    if i > 0 {
                        writeln!(out)?;
                    }
                    table.write_csv(&mut out, Some(&format!("{} table={}", self.provenance, table.name)))?;
                }
            }
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }

    /// Saves to `path`. With CSV and several tables, the first goes to
    /// `path` and table `name` to `<stem>.<name>.<ext>` beside it. Returns the
    /// files written.
    pub fn save(&self, format: OutputFormat, path: &Path) -> Result<Vec<PathBuf>> {
        if format == OutputFormat::Json || self.tables.len() <= 1 {
            let mut file = fs::File::create(path)?;
            self.write(format, &mut file)?;
            return Ok(vec![path.to_path_buf()]);
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
        let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
        let mut written = Vec::with_capacity(self.tables.len());
        for (i, table) in self.tables.iter().enumerate() {
            let target = if i == 0 {
                path.to_path_buf()
            } else {
                path.with_file_name(format!("{stem}.{}.{ext}", table.name))
            };
            let file = fs::File::create(&target)?;
            table.write_csv(file, Some(&format!("{} table={}", self.provenance, table.name)))?;
            written.push(target);
        }
        Ok(written)
    }
}

/// Runs the experiment named in `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let tables = match cfg.experiment {
        ExperimentName::LengthTable => vec![run_length_table(cfg)?],
        ExperimentName::HeadlineBounds => vec![run_headline_bounds(cfg)?],
        ExperimentName::TradeoffSurface => run_tradeoff_surface(cfg)?,
        ExperimentName::OptimalProtocols => run_optimal_protocols(cfg)?,
        ExperimentName::WirVsTau => vec![run_wir_vs_tau(cfg)?],
        ExperimentName::WirVsEpsilon => vec![run_wir_vs_epsilon(cfg)?],
        ExperimentName::DeltaWir => vec![run_delta_wir(cfg)?],
        ExperimentName::AsymptoticLengthCheck => vec![run_asymptotic_length_check(cfg)?],
    };
    Ok(ExperimentOutput {
        provenance: cfg.provenance(),
        config: cfg.clone(),
        tables,
    })
}

fn pairs(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn triples(a: &[f64], b: &[f64], c: &[f64]) -> Vec<(f64, f64, f64)> {
    pairs(a, b)
        .into_iter()
        .flat_map(|(x, y)| c.iter().map(move |&z| (x, y, z)))
        .collect()
}

fn collect_rows(name: &str, columns: &[&str], rows: Vec<Vec<f64>>) -> Table {
    let mut table = Table::new(name, columns);
    for row in rows {
        table.push(row);
    }
    table
}

/// `f_α(0)` followed by `f_α(ε)` on the ε grid, per α.
pub fn run_length_table(cfg: &ExperimentConfig) -> Result<Table> {
    let quad = QuadratureConfig::default();
    let mut points = Vec::new();
    for &alpha in &cfg.alpha {
        points.push((alpha, 0.0));
        points.extend(cfg.epsilon.iter().map(|&e| (alpha, e)));
    }
    let rows = points
        .par_iter()
        .map(|&(alpha, eps)| {
            let f = f_alpha(eps, alpha, &quad)?;
            Ok(vec![alpha, eps, f, length_scale(alpha, cfg.beta, cfg.gamma0) * f])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_rows(
        "length-table",
        &["alpha", "epsilon", "f_alpha", "length"],
        rows,
    ))
}

/// `L²(ε)/τ` in units of `k_BT/(γ₀τ)`, i.e. `β γ₀ L²(ε)`.
pub fn run_headline_bounds(cfg: &ExperimentConfig) -> Result<Table> {
    let quad = QuadratureConfig::default();
    let rows = pairs(&cfg.alpha, &cfg.epsilon)
        .par_iter()
        .map(|&(alpha, eps)| {
            let f = f_alpha(eps, alpha, &quad)?;
            let length = length_scale(alpha, cfg.beta, cfg.gamma0) * f;
            Ok(vec![alpha, eps, f, cfg.beta * cfg.gamma0 * length * length])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_rows(
        "headline-bounds",
        &["alpha", "epsilon", "f_eps", "scaled_bound"],
        rows,
    ))
}

/// Asymptotic trade-off surface over (ε, τ) plus the tail-gap comparison.
pub fn run_tradeoff_surface(cfg: &ExperimentConfig) -> Result<Vec<Table>> {
    let rows = triples(&cfg.alpha, &cfg.epsilon, &cfg.tau)
        .par_iter()
        .map(|&(alpha, eps, tau)| {
            let report = thermodynamic_length(
                &ErasureTask::new(cfg.beta, eps, tau)?,
                &BathSpectrum::new(alpha, cfg.gamma0)?,
            )?;
            Ok(vec![alpha, eps, tau, report.asymptotic_bound, report.precise_bound])
        })
        .collect::<Result<Vec<_>>>()?;
    let surface = collect_rows(
        "tradeoff-surface",
        &["alpha", "epsilon", "tau", "asymptotic_bound", "precise_bound"],
        rows,
    );
    Ok(vec![surface, run_asymptotic_length_check(cfg)?])
}

/// Exact `L(0) − L(ε)` against its small-ε form `2√(β^{α−1}γ₀⁻¹ε ln^{−α}(1/ε))`.
pub fn run_asymptotic_length_check(cfg: &ExperimentConfig) -> Result<Table> {
    let rows = pairs(&cfg.alpha, &cfg.epsilon)
        .par_iter()
        .map(|&(alpha, eps)| {
            // the tail integral equals f(0) − f(ε) without the cancellation
            let exact = length_scale(alpha, cfg.beta, cfg.gamma0) * tail_integral(eps, alpha)?;
            let approx = scaled_tail_bound(eps, alpha, cfg.beta, cfg.gamma0)?;
            Ok(vec![alpha, eps, exact, approx, (exact - approx).abs() / exact])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_rows(
        "asymptotic-length-check",
        &["alpha", "epsilon", "exact_gap", "asymptotic_gap", "relative_error"],
        rows,
    ))
}

/// `t̃` grid for protocol curves: log-spaced where the initial power law
/// lives, uniform elsewhere.
fn protocol_curve_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..40).map(|k| 10f64.powf(-6.0 + 4.0 * k as f64 / 40.0)).collect();
    grid.extend((0..=99).map(|k| 0.01 + 0.99 * k as f64 / 99.0));
    *grid.last_mut().unwrap() = 1.0;
    grid
}

/// Optimal `λ(t̃)` curves and their fitted initial exponents.
pub fn run_optimal_protocols(cfg: &ExperimentConfig) -> Result<Vec<Table>> {
    let ode = OdeConfig::default();
    let built = pairs(&cfg.alpha, &cfg.epsilon)
        .par_iter()
        .map(|&(alpha, eps)| {
            let task = ErasureTask::new(cfg.beta, eps, 1.0)?;
            let protocol = optimal_protocol(&task, &BathSpectrum::new(alpha, cfg.gamma0)?, &ode)?;
            let exponent = if task.lambda_max() > 0.0 {
                scaling_exponent_fit(&protocol, EXPONENT_FIT_WINDOW)?
            } else {
                f64::NAN
            };
            Ok((alpha, eps, task.lambda_max(), protocol, exponent))
        })
        .collect::<Result<Vec<_>>>()?;

    let grid = protocol_curve_grid();
    let mut curves = Table::new(
        "optimal-protocols",
        &["alpha", "epsilon", "t_tilde", "lambda", "dlambda_dt_tilde"],
    );
    let mut exponents = Table::new(
        "exponents",
        &[
            "alpha",
            "epsilon",
            "fitted_exponent",
            "expected_exponent",
            "lambda_end",
            "lambda_max",
        ],
    );
    for (alpha, eps, lambda_max, protocol, exponent) in &built {
        for &t in &grid {
            curves.push(vec![*alpha, *eps, t, protocol.lambda(t), protocol.derivative(t)]);
        }
        exponents.push(vec![
            *alpha,
            *eps,
            *exponent,
            2.0 / (3.0 - alpha),
            protocol.lambda(1.0),
            *lambda_max,
        ]);
    }
    Ok(vec![curves, exponents])
}

/// Irreversible work of one protocol run.
fn irr_work(protocol: &Protocol, task: &ErasureTask, spectrum: &BathSpectrum) -> Result<(f64, f64)> {
    let traj = simulate(protocol, task, spectrum, InitialState::default(), &OdeConfig::default())?;
    Ok((traj.irr_work, traj.achieved_error))
}

/// Optimal, linear and quadratic protocols for one `(α, ε)`.
fn protocol_family(task: &ErasureTask, spectrum: &BathSpectrum) -> Result<[Protocol; 3]> {
    let lm = task.lambda_max();
    Ok([
        optimal_protocol(task, spectrum, &OdeConfig::default())?,
        linear_protocol(lm)?,
        power_protocol(lm, 2.0)?,
    ])
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub f_eps: f64,
    pub length: f64,
    pub precise_bound: f64,
    pub asymptotic_bound: f64,
    pub irr_work_optimal: f64,
    pub irr_work_linear: f64,
    pub irr_work_quadratic: f64,
    /// Final excited population under the optimal protocol.
    pub achieved_error: f64,
}

impl SweepRecord {
    pub const COLUMNS: [&'static str; 11] = [
        "alpha",
        "epsilon",
        "tau",
        "f_eps",
        "length",
        "precise_bound",
        "asymptotic_bound",
        "irr_work_optimal",
        "irr_work_linear",
        "irr_work_quadratic",
        "achieved_error",
    ];

    fn row(&self) -> Vec<f64> {
        vec![
            self.alpha,
            self.epsilon,
            self.tau,
            self.f_eps,
            self.length,
            self.precise_bound,
            self.asymptotic_bound,
            self.irr_work_optimal,
            self.irr_work_linear,
            self.irr_work_quadratic,
            self.achieved_error,
        ]
    }
}

pub fn sweep_table(records: &[SweepRecord]) -> Table {
    collect_rows(
        "sweep",
        &SweepRecord::COLUMNS,
        records.iter().map(SweepRecord::row).collect(),
    )
}

/// Bounds and simulated irreversible work for optimal, linear and quadratic
/// protocols over every `(α, ε, τ)` combination, in grid order.
pub fn run_sweep(alpha: &[f64], epsilon: &[f64], tau: &[f64], beta: f64, gamma0: f64) -> Result<Vec<SweepRecord>> {
    // optimal protocols do not depend on τ, so build each once
    let families = pairs(alpha, epsilon)
        .par_iter()
        .map(|&(a, e)| protocol_family(&ErasureTask::new(beta, e, 1.0)?, &BathSpectrum::new(a, gamma0)?))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64, f64, f64)> = pairs(alpha, epsilon)
        .into_iter()
        .enumerate()
        .flat_map(|(i, (a, e))| tau.iter().map(move |&t| (i, a, e, t)))
        .collect();
    jobs.par_iter()
        .map(|&(i, a, e, t)| {
            let task = ErasureTask::new(beta, e, t)?;
            let spectrum = BathSpectrum::new(a, gamma0)?;
            let report = thermodynamic_length(&task, &spectrum)?;
            let [opt, lin, quad] = &families[i];
            let (w_opt, achieved) = irr_work(opt, &task, &spectrum)?;
            Ok(SweepRecord {
                alpha: a,
                epsilon: e,
                tau: t,
                f_eps: report.f_eps,
                length: report.length,
                precise_bound: report.precise_bound,
                asymptotic_bound: report.asymptotic_bound,
                irr_work_optimal: w_opt,
                irr_work_linear: irr_work(lin, &task, &spectrum)?.0,
                irr_work_quadratic: irr_work(quad, &task, &spectrum)?.0,
                achieved_error: achieved,
            })
        })
        .collect()
}

/// Irreversible work against τ for the three protocol families and both
/// bounds. Rows with `γ₀τ` below [`SLOW_DRIVING_MIN_GAMMA_TAU`] carry
/// `slow_driving = 0`.
pub fn run_wir_vs_tau(cfg: &ExperimentConfig) -> Result<Table> {
    let records = run_sweep(&cfg.alpha, &cfg.epsilon, &cfg.tau, cfg.beta, cfg.gamma0)?;
    let rows = records
        .iter()
        .map(|r| {
            vec![
                r.alpha,
                r.epsilon,
                r.tau,
                r.irr_work_optimal,
                r.irr_work_linear,
                r.irr_work_quadratic,
                r.precise_bound,
                r.asymptotic_bound,
                r.achieved_error,
                f64::from(u8::from(cfg.gamma0 * r.tau >= SLOW_DRIVING_MIN_GAMMA_TAU)),
            ]
        })
        .collect();
    Ok(collect_rows(
        "wir-vs-tau",
        &[
            "alpha",
            "epsilon",
            "tau",
            "irr_work_optimal",
            "irr_work_linear",
            "irr_work_quadratic",
            "precise_bound",
            "asymptotic_bound",
            "achieved_error_optimal",
            "slow_driving",
        ],
        rows,
    ))
}

/// `ΔW_ir(ε) = [W_min(ε) − W_min(10ε)] / W_min(0)` with `W_min = L²/τ`.
/// `10ε` is clamped to `1/2`, where the minimal work vanishes.
pub fn delta_wir(epsilon: f64, alpha: f64) -> Result<f64> {
    let quad = QuadratureConfig::default();
    let f0 = f_alpha(0.0, alpha, &quad)?;
    let f_eps = f_alpha(epsilon, alpha, &quad)?;
    let f_ten = f_alpha((10.0 * epsilon).min(0.5), alpha, &quad)?;
    Ok((f_eps * f_eps - f_ten * f_ten) / (f0 * f0))
}

/// Optimal-protocol irreversible work against ε with both bounds and `ΔW_ir`.
pub fn run_wir_vs_epsilon(cfg: &ExperimentConfig) -> Result<Table> {
    let rows = triples(&cfg.alpha, &cfg.tau, &cfg.epsilon)
        .par_iter()
        .map(|&(alpha, tau, eps)| {
            let task = ErasureTask::new(cfg.beta, eps, tau)?;
            let spectrum = BathSpectrum::new(alpha, cfg.gamma0)?;
            let report = thermodynamic_length(&task, &spectrum)?;
            let protocol = optimal_protocol(&task, &spectrum, &OdeConfig::default())?;
            let (w, achieved) = irr_work(&protocol, &task, &spectrum)?;
            Ok(vec![
                alpha,
                eps,
                tau,
                w,
                report.precise_bound,
                report.asymptotic_bound,
                delta_wir(eps, alpha)?,
                achieved,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_rows(
        "wir-vs-epsilon",
        &[
            "alpha",
            "epsilon",
            "tau",
            "irr_work_optimal",
            "precise_bound",
            "asymptotic_bound",
            "delta_wir",
            "achieved_error_optimal",
        ],
        rows,
    ))
}

pub fn run_delta_wir(cfg: &ExperimentConfig) -> Result<Table> {
    let rows = pairs(&cfg.alpha, &cfg.epsilon)
        .par_iter()
        .map(|&(alpha, eps)| Ok(vec![alpha, eps, delta_wir(eps, alpha)?]))
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_rows("delta-wir", &["alpha", "epsilon", "delta_wir"], rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(name: ExperimentName, given: ConfigOverrides) -> ExperimentConfig {
        ExperimentConfig::resolve(name, given).unwrap()
    }

    #[test]
    fn length_table_rows() {
        let out = run(&config(ExperimentName::LengthTable, ConfigOverrides::default())).unwrap();
        let t = &out.tables[0];
        assert_eq!(t.rows.len(), 3 * 17);
        for (alpha, expected) in [(0.0, 1.1981), (1.0, 0.9433), (2.0, 1.0914)] {
            let row = t.rows.iter().find(|r| r[0] == alpha && r[1] == 0.0).unwrap();
            assert!((row[2] - expected).abs() <= 5e-4);
        }
    }

    #[test]
    fn headline_rows() {
        let given = ConfigOverrides {
            epsilon: Some(vec![0.01, 0.001, 0.5]),
            ..Default::default()
        };
        let t = run_headline_bounds(&config(ExperimentName::HeadlineBounds, given)).unwrap();
        let scaled = t.column("scaled_bound").unwrap();
        assert!((scaled[0] - 0.997).abs() <= 0.002);
        assert!((scaled[1] - 1.288).abs() <= 0.002);
        assert_eq!(scaled[2], 0.0);
    }

    #[test]
    fn surface_is_monotone_and_inverse_in_tau() {
        let given = ConfigOverrides {
            tau: Some(vec![100.0, 200.0, 400.0]),
            ..Default::default()
        };
        let tables = run_tradeoff_surface(&config(ExperimentName::TradeoffSurface, given)).unwrap();
        let surface = &tables[0];
        let n_tau = 3;
        for chunk in surface.rows.chunks(n_tau) {
            assert!(chunk.windows(2).all(|w| w[1][3] < w[0][3]));
            assert_eq!(chunk[0][3], 2.0 * chunk[1][3]);
        }
        // decreasing in ε at fixed τ
        let at_tau: Vec<f64> = surface.rows.iter().filter(|r| r[2] == 200.0).map(|r| r[3]).collect();
        assert!(at_tau.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(tables[1].name, "asymptotic-length-check");
    }

    #[test]
    fn delta_wir_properties() {
        let eps = default_epsilon_grid();
        let values: Vec<f64> = eps.iter().map(|&e| delta_wir(e, 1.0).unwrap()).collect();
        assert!(values.iter().all(|&v| v > 0.0));
        // grows with ε, i.e. shrinks towards 0 as the error is pushed down;
        // near ε = 0.05 the clamp 10ε → 1/2 bends it over
        let small: Vec<f64> = eps
            .iter()
            .zip(&values)
            .filter(|(e, _)| **e <= 0.02)
            .map(|(_, v)| *v)
            .collect();
        assert!(small.windows(2).all(|w| w[1] > w[0]));
        assert!(delta_wir(1e-14, 1.0).unwrap() < 1e-5);
    }

    #[test]
    fn optimal_protocol_exponents() {
        let tables =
            run_optimal_protocols(&config(ExperimentName::OptimalProtocols, ConfigOverrides::default())).unwrap();
        let exps = &tables[1];
        for row in &exps.rows {
            assert!((row[2] - 1.0).abs() <= 0.02);
            assert!((row[4] - row[5]).abs() <= 1e-4 * row[5].max(1.0));
        }
        assert_eq!(tables[0].rows.len(), 3 * protocol_curve_grid().len());
    }

    #[test]
    fn wir_vs_tau_small_grid() {
        let given = ConfigOverrides {
            tau: Some(vec![20.0, 200.0]),
            ..Default::default()
        };
        let t = run_wir_vs_tau(&config(ExperimentName::WirVsTau, given)).unwrap();
        assert_eq!(t.rows.len(), 2);
        let row = &t.rows[1];
        assert!(row[3] < row[4] && row[3] < row[5]);
        assert_eq!(t.rows[0][9], 0.0);
        assert_eq!(row[9], 1.0);
    }

    #[test]
    fn wir_vs_epsilon_decreases_in_epsilon() {
        let given = ConfigOverrides {
            epsilon: Some(vec![1e-5, 1e-3, 1e-1]),
            ..Default::default()
        };
        let t = run_wir_vs_epsilon(&config(ExperimentName::WirVsEpsilon, given)).unwrap();
        let w = t.column("irr_work_optimal").unwrap();
        assert!(w.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn csv_output_is_deterministic_and_split_on_save() {
        let cfg = config(
            ExperimentName::TradeoffSurface,
            ConfigOverrides {
                epsilon: Some(vec![1e-3, 1e-2]),
                tau: Some(vec![100.0]),
                ..Default::default()
            },
        );
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        let (mut sa, mut sb) = (Vec::new(), Vec::new());
        a.write(OutputFormat::Csv, &mut sa).unwrap();
        b.write(OutputFormat::Csv, &mut sb).unwrap();
        assert_eq!(sa, sb);
        let text = String::from_utf8(sa).unwrap();
        assert!(text.starts_with("# landauer "));
        assert!(text.contains("\n\n# landauer "));

        let dir = tempfile::tempdir().unwrap();
        let files = a.save(OutputFormat::Csv, &dir.path().join("surface.csv")).unwrap();
        assert_eq!(files.len(), 2);
        assert!(files[1].ends_with("surface.asymptotic-length-check.csv"));
        let json_path = dir.path().join("surface.json");
        a.save(OutputFormat::Json, &json_path).unwrap();
        let parsed: ExperimentOutput = serde_json::from_slice(&fs::read(json_path).unwrap()).unwrap();
        assert_eq!(parsed.tables.len(), 2);
    }
}
