//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! experiment = wir-vs-tau
//! alpha      = 1
//! epsilon    = 1e-4
//! tau        = logspace(10, 1e4, 12)
//! format     = csv
//! ```
//!
//! Numeric keys accept a single value, a comma-separated list,
//! `logspace(a, b, n)` or `linspace(a, b, n)`. Command-line flags override
//! file values.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::format_param;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    LengthTable,
    HeadlineBounds,
    TradeoffSurface,
    OptimalProtocols,
    WirVsTau,
    WirVsEpsilon,
    DeltaWir,
    AsymptoticLengthCheck,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 8] = [
        ExperimentName::LengthTable,
        ExperimentName::HeadlineBounds,
        ExperimentName::TradeoffSurface,
        ExperimentName::OptimalProtocols,
        ExperimentName::WirVsTau,
        ExperimentName::WirVsEpsilon,
        ExperimentName::DeltaWir,
        ExperimentName::AsymptoticLengthCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::LengthTable => "length-table",
            ExperimentName::HeadlineBounds => "headline-bounds",
            ExperimentName::TradeoffSurface => "tradeoff-surface",
            ExperimentName::OptimalProtocols => "optimal-protocols",
            ExperimentName::WirVsTau => "wir-vs-tau",
            ExperimentName::WirVsEpsilon => "wir-vs-epsilon",
            ExperimentName::DeltaWir => "delta-wir",
            ExperimentName::AsymptoticLengthCheck => "asymptotic-length-check",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| {
            let known: Vec<&str> = Self::ALL.iter().map(|n| n.as_str()).collect();
            Error::Config(format!("unknown experiment `{s}` (known: {})", known.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

/// Parses `1e-4`, `0, 1, 2`, `logspace(1e-6, 1e-1, 16)` or
/// `linspace(0, 1, 5)`. Grid endpoints are reproduced exactly.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    for (prefix, log) in [("logspace(", true), ("linspace(", false)] {
        if let Some(inner) = text.strip_prefix(prefix) {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| Error::Config(format!("missing `)` in `{text}`")))?;
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::Config(format!(
                    "`{text}` needs three arguments (start, stop, count)"
                )));
            }
            let a = parse_number(parts[0])?;
            let b = parse_number(parts[1])?;
            let n: usize = parts[2]
                .parse()
                .map_err(|_| Error::Config(format!("invalid grid size `{}`", parts[2])))?;
            return grid(a, b, n, log);
        }
    }
    let values: Vec<f64> = text.split(',').map(|p| parse_number(p.trim())).collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::Config("empty value list".to_owned()));
    }
    Ok(values)
}

fn parse_number(text: &str) -> Result<f64> {
    let v: f64 = text
        .parse()
        .map_err(|_| Error::Config(format!("invalid number `{text}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("non-finite value `{text}`")))
    }
}

fn grid(a: f64, b: f64, n: usize, log: bool) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Config("grid size must be at least 1".to_owned()));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    if log && !(a > 0.0 && b > 0.0) {
        return Err(Error::Config(format!(
            "logspace bounds must be positive, got ({a}, {b})"
        )));
    }
    let last = (n - 1) as f64;
    let mut values: Vec<f64> = (0..n)
        .map(|k| {
            let s = k as f64 / last;
            if log {
                10f64.powf(a.log10() + s * (b.log10() - a.log10()))
            } else {
                a + s * (b - a)
            }
        })
        .collect();
    values[0] = a;
    values[n - 1] = b;
    Ok(values)
}

/// Partially specified configuration, from a file and/or flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub experiment: Option<ExperimentName>,
    pub alpha: Option<Vec<f64>>,
    pub epsilon: Option<Vec<f64>>,
    pub tau: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub gamma0: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl ConfigOverrides {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: Error| match e {
                Error::Config(msg) => Error::Config(format!("line {}: {msg}", lineno + 1)),
                other => other,
            };
            match key {
                "experiment" => cfg.experiment = Some(value.parse().map_err(at)?),
                "alpha" => cfg.alpha = Some(parse_values(value).map_err(at)?),
                "epsilon" => cfg.epsilon = Some(parse_values(value).map_err(at)?),
                "tau" => cfg.tau = Some(parse_values(value).map_err(at)?),
                "beta" => cfg.beta = Some(parse_number(value).map_err(at)?),
                "gamma0" => cfg.gamma0 = Some(parse_number(value).map_err(at)?),
                "output" => cfg.output = Some(PathBuf::from(value)),
                "format" => cfg.format = Some(value.parse().map_err(at)?),
                other => return Err(Error::Config(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config `{}`: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Values set in `flags` win over `self`.
    pub fn merged_with(self, flags: ConfigOverrides) -> Self {
        Self {
            experiment: flags.experiment.or(self.experiment),
            alpha: flags.alpha.or(self.alpha),
            epsilon: flags.epsilon.or(self.epsilon),
            tau: flags.tau.or(self.tau),
            beta: flags.beta.or(self.beta),
            gamma0: flags.gamma0.or(self.gamma0),
            output: flags.output.or(self.output),
            format: flags.format.or(self.format),
        }
    }
}

/// Fully resolved configuration of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    pub alpha: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub tau: Vec<f64>,
    pub beta: f64,
    pub gamma0: f64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

/// 16 log-spaced points in `[1e-6, 1e-1]`.
pub fn default_epsilon_grid() -> Vec<f64> {
    grid(1e-6, 1e-1, 16, true).expect("static grid")
}

/// 12 log-spaced points in `γ₀τ ∈ [10, 1e4]`.
pub fn default_tau_grid() -> Vec<f64> {
    grid(10.0, 1e4, 12, true).expect("static grid")
}

impl ExperimentConfig {
    /// Fills in per-experiment defaults and validates every value.
    pub fn resolve(name: ExperimentName, given: ConfigOverrides) -> Result<Self> {
        use ExperimentName::*;
        let (alpha, epsilon, tau): (Vec<f64>, Vec<f64>, Vec<f64>) = match name {
            LengthTable | AsymptoticLengthCheck => (vec![0.0, 1.0, 2.0], default_epsilon_grid(), vec![1.0]),
            HeadlineBounds => (vec![0.0], vec![0.01, 0.001], vec![1.0]),
            TradeoffSurface => (vec![1.0], default_epsilon_grid(), default_tau_grid()),
            OptimalProtocols => (vec![1.0], vec![1e-1, 1e-2, 1e-4], vec![1.0]),
            WirVsTau => (vec![1.0], vec![1e-4], default_tau_grid()),
            WirVsEpsilon | DeltaWir => (vec![1.0], default_epsilon_grid(), vec![200.0]),
        };
        let cfg = Self {
            experiment: name,
            alpha: given.alpha.unwrap_or(alpha),
            epsilon: given.epsilon.unwrap_or(epsilon),
            tau: given.tau.unwrap_or(tau),
            beta: given.beta.unwrap_or(1.0),
            gamma0: given.gamma0.unwrap_or(1.0),
            output: given.output,
            format: given.format.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Config(format!("invalid {what} value {v}")));
        for &a in &self.alpha {
            if !(a >= 0.0 && a.is_finite()) {
                return bad("alpha", a);
            }
        }
        for &e in &self.epsilon {
            if !(e > 0.0 && e <= 0.5) {
                return bad("epsilon (must lie in (0, 1/2])", e);
            }
        }
        for &t in &self.tau {
            if !(t > 0.0 && t.is_finite()) {
                return bad("tau", t);
            }
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta", self.beta);
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return bad("gamma0", self.gamma0);
        }
        if self.alpha.is_empty() || self.epsilon.is_empty() || self.tau.is_empty() {
            return Err(Error::Config(
                "alpha, epsilon and tau lists must be non-empty".to_owned(),
            ));
        }
        Ok(())
    }

    /// One-line record of everything that determines the output.
    pub fn provenance(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|&x| format_param(x)).collect::<Vec<_>>().join(";");
        format!(
            "landauer {} experiment={} alpha={} epsilon={} tau={} beta={} gamma0={}",
            env!("CARGO_PKG_VERSION"),
            self.experiment,
            list(&self.alpha),
            list(&self.epsilon),
            list(&self.tau),
            format_param(self.beta),
            format_param(self.gamma0)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_syntax() {
        assert_eq!(parse_values("1e-4").unwrap(), vec![1e-4]);
        assert_eq!(parse_values(" 0, 1 ,2").unwrap(), vec![0.0, 1.0, 2.0]);
        let g = parse_values("logspace(1e-6, 1e-1, 16)").unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!((g[0], g[15]), (1e-6, 1e-1));
        assert!((g[3] / 1e-5 - 1.0).abs() < 1e-13);
        assert_eq!(
            parse_values("linspace(0, 1, 5)").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert!(parse_values("logspace(0, 1, 3)").is_err());
        assert!(parse_values("1, x").is_err());
        assert!(parse_values("linspace(0, 1)").is_err());
        assert!(parse_values("nan").is_err());
    }

    #[test]
    fn default_grids() {
        let eps = default_epsilon_grid();
        assert_eq!(eps.len(), 16);
        assert_eq!((eps[0], eps[15]), (1e-6, 1e-1));
        let tau = default_tau_grid();
        assert_eq!(tau.len(), 12);
        assert_eq!((tau[0], tau[11]), (10.0, 1e4));
    }

    #[test]
    fn file_parsing_and_flag_precedence() {
        let file = ConfigOverrides::parse(
            "# sweep\nexperiment = wir-vs-tau\nalpha = 1\nepsilon = 1e-4 # target\ntau = logspace(10, 1000, 3)\nformat = json\n",
        )
        .unwrap();
        assert_eq!(file.experiment, Some(ExperimentName::WirVsTau));
        let tau = file.tau.clone().unwrap();
        assert_eq!((tau.len(), tau[0], tau[2]), (3, 10.0, 1000.0));
        assert!((tau[1] / 100.0 - 1.0).abs() < 1e-14);
        let flags = ConfigOverrides {
            alpha: Some(vec![2.0]),
            format: Some(OutputFormat::Csv),
            ..Default::default()
        };
        let merged = file.merged_with(flags);
        assert_eq!(merged.alpha, Some(vec![2.0]));
        assert_eq!(merged.epsilon, Some(vec![1e-4]));
        assert_eq!(merged.format, Some(OutputFormat::Csv));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(ConfigOverrides::parse("alpha 1"), Err(Error::Config(_))));
        assert!(matches!(ConfigOverrides::parse("colour = red"), Err(Error::Config(_))));
        assert!(matches!(
            ConfigOverrides::parse("experiment = fig9"),
            Err(Error::Config(_))
        ));
        assert!(matches!(ConfigOverrides::parse("format = xml"), Err(Error::Config(_))));
    }

    #[test]
    fn resolution_defaults_and_validation() {
        let cfg = ExperimentConfig::resolve(ExperimentName::HeadlineBounds, ConfigOverrides::default()).unwrap();
        assert_eq!(cfg.alpha, vec![0.0]);
        assert_eq!(cfg.epsilon, vec![0.01, 0.001]);
        assert_eq!(cfg.format, OutputFormat::Csv);
        let bad = ConfigOverrides {
            epsilon: Some(vec![0.7]),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(ExperimentName::HeadlineBounds, bad).is_err());
        let bad = ConfigOverrides {
            beta: Some(-1.0),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(ExperimentName::WirVsTau, bad).is_err());
    }

    #[test]
    fn names_round_trip() {
        for name in ExperimentName::ALL {
            assert_eq!(name.as_str().parse::<ExperimentName>().unwrap(), name);
        }
    }

    #[test]
    fn provenance_is_stable() {
        let cfg = ExperimentConfig::resolve(ExperimentName::HeadlineBounds, ConfigOverrides::default()).unwrap();
        assert!(cfg
            .provenance()
            .ends_with("experiment=headline-bounds alpha=0 epsilon=0.01;0.001 tau=1 beta=1 gamma0=1"));
    }
}
