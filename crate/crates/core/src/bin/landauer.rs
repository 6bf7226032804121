use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use landauer::experiments::{self, ConfigOverrides, ExperimentConfig, ExperimentName, OutputFormat};
use landauer::geometry::{scaled_tail_bound, thermodynamic_length, Warning};
use landauer::table::{format_param, Table};
use landauer::{
    linear_protocol, optimal_protocol, power_protocol, simulate, BathSpectrum, ErasureTask, Error, InitialState,
    OdeConfig, Protocol, Result,
};

#[derive(Debug, Parser)]
#[command(
    name = "landauer",
    version,
    about = "Minimal energy cost of finite-time qubit erasure"
)]
struct Cli {
    /// Bath spectral exponent(s): a value, a list `0,1,2`, or `logspace(a,b,n)` / `linspace(a,b,n)`.
    #[arg(long, global = true, value_parser = values)]
    alpha: Option<Values>,
    /// Target error probability(ies), same syntax as --alpha.
    #[arg(long, global = true, value_parser = values)]
    epsilon: Option<Values>,
    /// Erasure duration(s), same syntax as --alpha.
    #[arg(long, global = true, value_parser = values)]
    tau: Option<Values>,
    /// Inverse temperature.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Coupling prefactor γ₀.
    #[arg(long, global = true)]
    gamma0: Option<f64>,
    /// Flat `key = value` config file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shape {
    Optimal,
    Linear,
    Quadratic,
    Power,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Thermodynamic length L(ε) and the derived constants.
    Length,
    /// Precise and asymptotic lower bounds on the irreversible work.
    Bound,
    /// Tabulate a driving protocol λ(t/τ).
    Protocol {
        #[arg(long, value_enum, default_value = "optimal")]
        kind: Shape,
        /// Exponent for `--kind power`.
        #[arg(long, default_value_t = 2.0)]
        exponent: f64,
    },
    /// Integrate the master equation under a protocol.
    Simulate {
        #[arg(long, value_enum, default_value = "optimal")]
        protocol: Shape,
        /// Exponent for `--protocol power`.
        #[arg(long, default_value_t = 2.0)]
        exponent: f64,
        /// Initial excited-state population.
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
    },
    /// Bounds and simulated work for optimal/linear/quadratic protocols over a grid.
    Sweep,
    /// Run a named reproduction experiment.
    Reproduce {
        /// One of the experiment names, e.g. `wir-vs-tau`.
        name: String,
    },
}

/// A parsed value list; a newtype so clap treats it as one argument.
#[derive(Debug, Clone)]
struct Values(Vec<f64>);

fn values(s: &str) -> std::result::Result<Values, String> {
    experiments::parse_values(s).map(Values).map_err(|e| e.to_string())
}

/// Flags merged over the optional config file.
struct Settings {
    given: ConfigOverrides,
    out: Option<PathBuf>,
    format: OutputFormat,
}

impl Settings {
    fn from_cli(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(path) => ConfigOverrides::load(path)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            experiment: None,
            alpha: cli.alpha.clone().map(|v| v.0),
            epsilon: cli.epsilon.clone().map(|v| v.0),
            tau: cli.tau.clone().map(|v| v.0),
            beta: cli.beta,
            gamma0: cli.gamma0,
            output: cli.out.clone(),
            format: cli.format.map(Into::into),
        };
        let given = file.merged_with(flags);
        Ok(Self {
            out: given.output.clone(),
            format: given.format.unwrap_or_default(),
            given,
        })
    }

    fn list(&self, values: &Option<Vec<f64>>, default: &[f64]) -> Vec<f64> {
        values.clone().unwrap_or_else(|| default.to_vec())
    }

    fn single(&self, name: &str, values: &Option<Vec<f64>>, default: f64) -> Result<f64> {
        match values.as_deref() {
            None => Ok(default),
            Some([v]) => Ok(*v),
            Some(_) => Err(Error::Config(format!("`{name}` takes a single value for this command"))),
        }
    }

    fn beta(&self) -> f64 {
        self.given.beta.unwrap_or(1.0)
    }

    fn gamma0(&self) -> f64 {
        self.given.gamma0.unwrap_or(1.0)
    }

    /// `axes` lists the parameter values actually used, defaults included.
    fn provenance(&self, command: &str, axes: &[(&str, &[f64])]) -> String {
        let mut line = format!("landauer {} command={command}", env!("CARGO_PKG_VERSION"));
        for (name, values) in axes {
            let shown: Vec<String> = values.iter().map(|&x| format_param(x)).collect();
            line.push_str(&format!(" {name}={}", shown.join(";")));
        }
        line.push_str(&format!(
            " beta={} gamma0={}",
            format_param(self.beta()),
            format_param(self.gamma0())
        ));
        line
    }
}

#[derive(Serialize)]
struct TablesJson<'a> {
    provenance: &'a str,
    tables: &'a [Table],
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_table(settings: &Settings, table: Table, provenance: &str) -> Result<()> {
    let bytes = match settings.format {
        OutputFormat::Csv => table.to_csv_string(Some(provenance)).into_bytes(),
        OutputFormat::Json => json_bytes(&TablesJson {
            provenance,
            tables: std::slice::from_ref(&table),
        })?,
    };
    emit(settings.out.as_deref(), &bytes)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn build_protocol(shape: Shape, exponent: f64, task: &ErasureTask, spectrum: &BathSpectrum) -> Result<Protocol> {
    let lm = task.lambda_max();
    match shape {
        Shape::Optimal => optimal_protocol(task, spectrum, &OdeConfig::default()),
        Shape::Linear => linear_protocol(lm),
        Shape::Quadratic => power_protocol(lm, 2.0),
        Shape::Power => power_protocol(lm, exponent),
    }
}

fn report_warnings(warnings: &[Warning]) {
    for w in warnings {
        match w {
            Warning::OutsideAsymptoticRegime { epsilon, limit } => {
                eprintln!("warning: epsilon = {epsilon} exceeds {limit}; the asymptotic bound is outside its regime")
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let settings = Settings::from_cli(&cli)?;
    let (beta, gamma0) = (settings.beta(), settings.gamma0());
    match cli.command {
        Command::Length | Command::Bound => {
            let is_length = matches!(cli.command, Command::Length);
            let alphas = settings.list(&settings.given.alpha, &[1.0]);
            let epsilons = settings.list(&settings.given.epsilon, &[0.01]);
            let taus = settings.list(&settings.given.tau, &[1.0]);
            let mut reports = Vec::new();
            let mut table = if is_length {
                Table::new(
                    "length",
                    &[
                        "alpha",
                        "epsilon",
                        "f_eps",
                        "f_zero",
                        "length",
                        "length_zero",
                        "mu_alpha",
                    ],
                )
            } else {
                Table::new(
                    "bound",
                    &[
                        "alpha",
                        "epsilon",
                        "tau",
                        "precise_bound",
                        "asymptotic_bound",
                        "tail_bound",
                    ],
                )
            };
            for &alpha in &alphas {
                let spectrum = BathSpectrum::new(alpha, gamma0)?;
                for &eps in &epsilons {
                    for &tau in if is_length { &taus[..1] } else { &taus[..] } {
                        let report = thermodynamic_length(&ErasureTask::new(beta, eps, tau)?, &spectrum)?;
                        report_warnings(&report.warnings);
                        if is_length {
                            table.push(vec![
                                alpha,
                                eps,
                                report.f_eps,
                                report.f_zero,
                                report.length,
                                report.length_zero,
                                report.mu_alpha,
                            ]);
                        } else {
                            let tail = scaled_tail_bound(eps, alpha, beta, gamma0)?;
                            table.push(vec![
                                alpha,
                                eps,
                                tau,
                                report.precise_bound,
                                report.asymptotic_bound,
                                tail,
                            ]);
                        }
                        reports.push(report);
                    }
                }
            }
            let provenance = if is_length {
                settings.provenance("length", &[("alpha", &alphas), ("epsilon", &epsilons)])
            } else {
                settings.provenance("bound", &[("alpha", &alphas), ("epsilon", &epsilons), ("tau", &taus)])
            };
            if is_length && settings.format == OutputFormat::Json {
                return emit(settings.out.as_deref(), &json_bytes(&reports)?);
            }
            emit_table(&settings, table, &provenance)
        }
        Command::Protocol { kind, exponent } => {
            let alpha = settings.single("alpha", &settings.given.alpha, 1.0)?;
            let eps = settings.single("epsilon", &settings.given.epsilon, 0.01)?;
            let task = ErasureTask::new(beta, eps, 1.0)?;
            let protocol = build_protocol(kind, exponent, &task, &BathSpectrum::new(alpha, gamma0)?)?;
            let command = format!("protocol kind={}", protocol.kind().label());
            let provenance = settings.provenance(&command, &[("alpha", &[alpha]), ("epsilon", &[eps])]);
            emit_table(&settings, protocol.to_table(), &provenance)
        }
        Command::Simulate { protocol, exponent, p0 } => {
            let alpha = settings.single("alpha", &settings.given.alpha, 1.0)?;
            let eps = settings.single("epsilon", &settings.given.epsilon, 0.01)?;
            let tau = settings.single("tau", &settings.given.tau, 200.0)?;
            let task = ErasureTask::new(beta, eps, tau)?;
            let spectrum = BathSpectrum::new(alpha, gamma0)?;
            let shape = build_protocol(protocol, exponent, &task, &spectrum)?;
            let traj = simulate(&shape, &task, &spectrum, InitialState::new(p0)?, &OdeConfig::default())?;
            match settings.format {
                OutputFormat::Json => emit(settings.out.as_deref(), &json_bytes(&traj.summary())?),
                OutputFormat::Csv => {
                    let command = format!("simulate protocol={} p0={}", shape.kind().label(), format_param(p0));
                    let axes: [(&str, &[f64]); 3] = [("alpha", &[alpha]), ("epsilon", &[eps]), ("tau", &[tau])];
                    emit_table(&settings, traj.to_table(), &settings.provenance(&command, &axes))
                }
            }
        }
        Command::Sweep => {
            let alphas = settings.list(&settings.given.alpha, &[1.0]);
            let epsilons = settings.list(&settings.given.epsilon, &[1e-4]);
            let taus = settings.list(&settings.given.tau, &experiments::default_tau_grid());
            let records = experiments::run_sweep(&alphas, &epsilons, &taus, beta, gamma0)?;
            match settings.format {
                OutputFormat::Json => emit(settings.out.as_deref(), &json_bytes(&records)?),
                OutputFormat::Csv => emit_table(
                    &settings,
                    experiments::sweep_table(&records),
                    &settings.provenance("sweep", &[("alpha", &alphas), ("epsilon", &epsilons), ("tau", &taus)]),
                ),
            }
        }
        Command::Reproduce { name } => {
            let name: ExperimentName = name.parse()?;
            let cfg = ExperimentConfig::resolve(name, settings.given.clone())?;
            let output = experiments::run(&cfg)?;
            match &cfg.output {
                Some(path) => {
                    for written in output.save(cfg.format, path)? {
                        eprintln!("wrote {}", written.display());
                    }
                    Ok(())
                }
                None => output.write(cfg.format, io::stdout().lock()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {err}", err.kind());
            ExitCode::FAILURE
        }
    }
}
