use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mmshare::metrics_io::{self, linear_grid, log_grid, ExportError, PlotError};
use mmshare::{campaign_curves, export, load_config, ChannelModel, Config, ConfigError, CoverageCurve, ExportFormat, Scenario};

#[derive(Parser)]
#[command(name = "mmshare-sim", version, about = "Monte Carlo coverage of shared mmWave networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario/model pair.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_with::<Scenario>)]
        scenario: Option<Scenario>,
        #[arg(long, value_parser = parse_with::<ChannelModel>)]
        model: Option<ChannelModel>,
    },
    /// Simulate all 4×4 scenario/model pairs and plot them together.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Key = value config file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    drops: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value = "csv", value_parser = parse_with::<ExportFormat>)]
    format: ExportFormat,
    /// Also write SVG coverage plots.
    #[arg(long)]
    plot: bool,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    sinr_min: f64,
    #[arg(long, default_value_t = 60.0, allow_hyphen_values = true)]
    sinr_max: f64,
    #[arg(long, default_value_t = 1.0)]
    sinr_step: f64,
    #[arg(long, default_value_t = 1e5)]
    rate_min: f64,
    #[arg(long, default_value_t = 1e10)]
    rate_max: f64,
    #[arg(long, default_value_t = 50)]
    rate_points: usize,
}

fn parse_with<T: std::str::FromStr<Err = impl ToString>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: T::Err| e.to_string())
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<ExportError> for Failure {
    fn from(e: ExportError) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<PlotError> for Failure {
    fn from(e: PlotError) -> Self {
        match e {
            PlotError::NoCurves => Failure::Config(e.to_string()),
            PlotError::Io { .. } => Failure::Io(e.to_string()),
        }
    }
}

impl GridArgs {
    fn grids(&self) -> Result<(Vec<f64>, Vec<f64>), Failure> {
        if !(self.sinr_step > 0.0 && self.sinr_max >= self.sinr_min) {
            return Err(Failure::Config("SINR grid needs step > 0 and max ≥ min".into()));
        }
        if !(self.rate_min > 0.0 && self.rate_max >= self.rate_min && self.rate_points >= 1) {
            return Err(Failure::Config("rate grid needs 0 < min ≤ max and at least one point".into()));
        }
        Ok((
            linear_grid(self.sinr_min, self.sinr_max, self.sinr_step),
            log_grid(self.rate_min, self.rate_max, self.rate_points),
        ))
    }
}

impl Common {
    fn config(&self) -> Result<Config, Failure> {
        let mut config = match &self.config {
            Some(path) => load_config(path)?,
            None => Config::default().with_seed_override(std::env::var(mmshare::config::SEED_ENV_VAR).ok().as_deref())?,
        };
        if let Some(d) = self.drops {
            config.num_drops = d;
        }
        if let Some(s) = self.seed {
            config.rng_seed = s;
        }
        let violations = config.validate();
        if !violations.is_empty() {
            return Err(ConfigError::Invalid(violations).into());
        }
        Ok(config)
    }
}

/// Runs one campaign, exports it under `dir` and returns its curves.
fn simulate(config: &Config, grids: &(Vec<f64>, Vec<f64>), dir: &Path, format: ExportFormat) -> Result<[CoverageCurve; 2], Failure> {
    let start = Instant::now();
    let results = mmshare::run_campaign(config);
    let curves = campaign_curves(config, &results, &grids.0, &grids.1).map_err(|e| Failure::Config(e.to_string()))?;
    export(config, &results, &curves, dir, format)?;
    let outage = results.iter().filter(|r| r.is_outage()).count() as f64 / results.len() as f64;
    eprintln!(
        "{:<28} {} drops in {:.1}s, outage {:.3}, P[SINR > 0 dB] = {:.3}",
        curves[0].label,
        results.len(),
        start.elapsed().as_secs_f64(),
        outage,
        curves[0].at(0.0).unwrap_or(f64::NAN),
    );
    Ok(curves)
}

fn plot(curves: &[CoverageCurve], dir: &Path) -> Result<(), Failure> {
    let (sinr, rate): (Vec<_>, Vec<_>) = curves.iter().cloned().partition(|c| c.metric == metrics_io::Metric::SinrDb);
    metrics_io::emit_plot(&sinr, dir.join("sinr_coverage.svg"))?;
    metrics_io::emit_plot(&rate, dir.join("rate_coverage.svg"))?;
    Ok(())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { common, scenario, model } => {
            let mut config = common.config()?;
            config.scenario = scenario.unwrap_or(config.scenario);
            config.channel_model = model.unwrap_or(config.channel_model);
            let grids = common.grid.grids()?;
            let curves = simulate(&config, &grids, &common.out, common.format)?;
            if common.plot {
                plot(&curves, &common.out)?;
            }
        }
        Command::Sweep { common } => {
            let base = common.config()?;
            let grids = common.grid.grids()?;
            let mut all = Vec::new();
            for model in ChannelModel::ALL {
                for scenario in Scenario::ALL {
                    let config = Config {
                        scenario,
                        channel_model: model,
                        ..base.clone()
                    };
                    let dir = common.out.join(format!("{}_{}", scenario.tag(), model.tag()));
                    all.extend(simulate(&config, &grids, &dir, common.format)?);
                }
            }
            // the sweep always writes its comparison plots
            plot(&all, &common.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            ExitCode::from(2)
        }
    }
}
