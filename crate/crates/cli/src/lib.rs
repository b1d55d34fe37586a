//! Batch front end: reads a parameter file, applies overrides and sweeps,
//! runs one verb and writes a CSV or JSON table.

pub mod table;
mod verbs;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use onemirror::{Params64, ParamSet};

pub use table::{Cell, Format, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "onemirror", version, about = "Scattering off a target in a two-location superposition")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Parameter file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one parameter; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    /// Monte-Carlo seed.
    #[arg(long, default_value_t = 1, global = true)]
    pub seed: u64,
    /// Sweep one parameter, `key:from:to:steps`.
    #[arg(long, value_name = "KEY:FROM:TO:STEPS", global = true)]
    pub sweep: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Exact,
    Cosine,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Verb {
    /// Target momentum density ρ(P).
    DensityDump {
        #[arg(long, default_value_t = 2001)]
        points: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
    },
    /// Final probe momentum distribution of the head-on model.
    #[command(name = "scan-1d")]
    Scan1d {
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
    },
    /// Head-on fringe visibility, folded numerically and in closed form.
    #[command(name = "visibility-1d")]
    Visibility1d,
    /// Angular distributions at α = 0 and α = π.
    Angular {
        #[arg(long, default_value_t = 10.0)]
        theta_min: f64,
        #[arg(long, default_value_t = 170.0)]
        theta_max: f64,
        #[arg(long, default_value_t = 0.25)]
        theta_step: f64,
    },
    /// Planar fringe visibility at one final angle.
    #[command(name = "visibility-2d")]
    Visibility2d {
        /// Final angle in degrees.
        #[arg(long, default_value_t = 60.0)]
        theta_fin: f64,
    },
    /// Target momentum at which orthogonality transfers to the probe.
    TransferCondition {
        #[arg(long, default_value_t = 60.0)]
        theta_fin: f64,
    },
    /// Brute-force cross-checks of the fast paths.
    Oracle {
        /// One of quadrature, density-dft, pstar, frame, derivative,
        /// transfer, angular-mc, all.
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 60.0)]
        theta_fin: f64,
        #[arg(long, default_value_t = 1_000_000)]
        events: u64,
    },
}

impl Verb {
    pub fn name(&self) -> &'static str {
        match self {
            Verb::DensityDump { .. } => "density-dump",
            Verb::Scan1d { .. } => "scan-1d",
            Verb::Visibility1d => "visibility-1d",
            Verb::Angular { .. } => "angular",
            Verb::Visibility2d { .. } => "visibility-2d",
            Verb::TransferCondition { .. } => "transfer-condition",
            Verb::Oracle { .. } => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, parameter file or parameter values.
    Usage(String),
    /// Failure while computing or writing.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<onemirror::Error> for CliError {
    fn from(e: onemirror::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKey {
    MassRatio,
    DpOverP,
    Alpha,
    ThetaInDeg,
}

impl SweepKey {
    pub fn name(self) -> &'static str {
        match self {
            SweepKey::MassRatio => "mass_ratio",
            SweepKey::DpOverP => "dp_over_p",
            SweepKey::Alpha => "alpha",
            SweepKey::ThetaInDeg => "theta_in_deg",
        }
    }

    fn apply(self, set: &mut ParamSet, value: f64) {
        match self {
            SweepKey::MassRatio => set.mass_target = value * set.mass_probe,
            SweepKey::DpOverP => set.dp_over_p = value,
            SweepKey::Alpha => set.alpha = value,
            SweepKey::ThetaInDeg => set.theta_in_deg = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub key: SweepKey,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Sweep {
    /// Evenly spaced values, both ends included.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.from + (self.to - self.from) * i as f64 / last)
            .collect()
    }
}

impl FromStr for Sweep {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("--sweep expects key:from:to:steps, got `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let [key, from, to, steps] = parts.as_slice() else {
            return Err(bad());
        };
        let key = match *key {
            "mass_ratio" => SweepKey::MassRatio,
            "dp_over_p" => SweepKey::DpOverP,
            "alpha" => SweepKey::Alpha,
            "theta_in_deg" => SweepKey::ThetaInDeg,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown sweep key `{other}` (mass_ratio, dp_over_p, alpha, theta_in_deg)"
                )))
            }
        };
        let from: f64 = from.parse().map_err(|_| bad())?;
        let to: f64 = to.parse().map_err(|_| bad())?;
        let steps: usize = steps.parse().map_err(|_| bad())?;
        if steps < 2 {
            return Err(CliError::Usage("sweep needs at least 2 steps".into()));
        }
        if !(from.is_finite() && to.is_finite()) {
            return Err(bad());
        }
        Ok(Sweep { key, from, to, steps })
    }
}

/// Everything a run needs, parsed and validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub verb: Verb,
    pub params: ParamSet,
    pub sweep: Option<Sweep>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let mut params = match &cli.common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                ParamSet::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            None => ParamSet::default(),
        };
        for item in &cli.common.overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got `{item}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--set {key}: `{value}` is not a number")))?;
            params
                .set(key.trim(), value)
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        let sweep = cli.common.sweep.as_deref().map(str::parse).transpose()?;
        let config = RunConfig {
            verb: cli.verb.clone(),
            params,
            sweep,
            output: cli.common.output.clone(),
            format: cli.common.format,
            seed: cli.common.seed,
        };
        for set in config.parameter_sets() {
            validate(&set)?;
        }
        config.check_verb()?;
        Ok(config)
    }

    fn check_verb(&self) -> Result<(), CliError> {
        match &self.verb {
            Verb::Oracle { suite, .. } if onemirror::OracleSuite::parse(suite).is_none() => Err(CliError::Usage(
                format!("unknown oracle suite `{suite}` ({})", onemirror::OracleSuite::NAMES.join(", ")),
            )),
            Verb::Oracle { events: 0, .. } => Err(CliError::Usage("--events must be positive".into())),
            Verb::DensityDump { points, .. } if *points < 2 => {
                Err(CliError::Usage("--points must be at least 2".into()))
            }
            Verb::Angular {
                theta_min,
                theta_max,
                theta_step,
            } if !(*theta_min > 0.0 && theta_max < &180.0 && theta_min < theta_max && *theta_step > 0.0) => {
                Err(CliError::Usage("angular grid must satisfy 0 < min < max < 180 and step > 0".into()))
            }
            Verb::Visibility2d { theta_fin } | Verb::TransferCondition { theta_fin } | Verb::Oracle { theta_fin, .. }
                if !(*theta_fin > 0.0 && *theta_fin < 180.0) =>
            {
                Err(CliError::Usage("--theta-fin must lie in (0, 180) degrees".into()))
            }
            _ => Ok(()),
        }
    }

    /// The base parameters, or one set per sweep value.
    pub fn parameter_sets(&self) -> Vec<ParamSet> {
        match self.sweep {
            None => vec![self.params],
            Some(s) => s
                .values()
                .into_iter()
                .map(|v| {
                    let mut set = self.params;
                    s.key.apply(&mut set, v);
                    set
                })
                .collect(),
        }
    }
}

fn validate(set: &ParamSet) -> Result<Params64, CliError> {
    set.validate()
        .map_err(|e| CliError::Usage(format!("invalid parameters: {e}")))
}

/// Builds the full table for a run. Sweep points are computed in parallel
/// and assembled in sweep order.
pub fn build_table(config: &RunConfig) -> Result<Table, CliError> {
    let sets = config.parameter_sets();
    let parts: Vec<Table> = sets
        .par_iter()
        .map(|set| verbs::run_verb(&config.verb, &validate(set)?, config.seed))
        .collect::<Result<_, CliError>>()?;

    let sweep_desc = config.sweep.map_or("none".to_string(), |s| {
        format!("{}:{}:{}:{}", s.key.name(), s.from, s.to, s.steps)
    });
    let mut table = Table::default();
    table.comments.push(format!(
        "onemirror {VERSION} verb={} seed={} sweep={sweep_desc}",
        config.verb.name(),
        config.seed
    ));
    table.comments.push(format!("params: {}", config.params.echo()));

    match config.sweep {
        None => {
            let part = parts.into_iter().next().expect("one parameter set");
            table.comments.extend(part.comments);
            table.columns = part.columns;
            table.rows = part.rows;
        }
        Some(s) => {
            let values = s.values();
            table.columns.push(s.key.name().to_string());
            for (value, part) in values.into_iter().zip(parts) {
                if table.columns.len() == 1 {
                    table.columns.extend(part.columns.iter().cloned());
                }
                for c in part.comments {
                    table.comments.push(format!("{}={value}: {c}", s.key.name()));
                }
                for row in part.rows {
                    let mut full = vec![Cell::Num(value)];
                    full.extend(row);
                    table.rows.push(full);
                }
            }
        }
    }
    Ok(table)
}

/// Runs the configuration and writes its table.
pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let text = build_table(config)?.render(config.format);
    match &config.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Runtime(format!("cannot write output: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        let s: Sweep = "dp_over_p:0:0.2:21".parse().unwrap();
        assert_eq!(s.key, SweepKey::DpOverP);
        let v = s.values();
        assert_eq!(v.len(), 21);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[20], 0.2);
        assert!("dp_over_p:0:0.2:1".parse::<Sweep>().is_err());
        assert!("width:0:1:3".parse::<Sweep>().is_err());
        assert!("alpha:0:1".parse::<Sweep>().is_err());
    }

    #[test]
    fn mass_ratio_sweep_keeps_probe_mass() {
        let mut set = ParamSet {
            mass_probe: 2.0,
            ..ParamSet::default()
        };
        SweepKey::MassRatio.apply(&mut set, 1.5);
        assert_eq!(set.mass_target, 3.0);
    }
}
