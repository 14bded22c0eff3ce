use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dephase_cli::acceptance::{parse_criterion, run_suite, summary_csv};
use dephase_cli::config::{apply_overrides, config_from_value, preset};
use dephase_cli::error::{CliError, Result};
use dephase_cli::{parse_config, run_scenario, ScenarioConfig, ScenarioId};
use dephase_core::Statistics;

const CONFIG_HELP: &str = "\
Config defaults: physics.T = 0.1, physics.mu = 0, physics.lambda = 0.05, physics.g = 1,
physics.statistics = fd, physics.delta_T = physics.delta_mu = 0, physics.n_eq = 0.5,
physics.delta_n = 0.1, grids.t = 0..40 (401 points), grids.mu = -4..4 (161 points),
output.path = out, output.precision = 12, tolerance = 0.05.
Scenarios: ons1 onsevo1 onsevo2 entroevo entroprod mutint onsteste1 onsteste2 custom.";

#[derive(Parser)]
#[command(name = "dephase", version, about = "Dephasing-driven transport in a bipartite fermionic chain", after_help = CONFIG_HELP)]
struct Cli {
    /// Output directory (overrides output.path).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative tolerance for comparison reports.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Occupation statistics (overrides physics.statistics).
    #[arg(long, global = true, value_enum)]
    stats: Option<StatsArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsArg {
    Fd,
    Boltzmann,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a JSON config file.
    Run { config: PathBuf },
    /// Reproduce a figure from its preset, with optional key.path=value overrides.
    Figure { scenario: String, overrides: Vec<String> },
    /// Run the acceptance suite.
    Accept {
        /// Run only this criterion (C1..C10).
        #[arg(long)]
        only: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Threads(e.to_string()))?;
    }
    match &cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(config).map_err(|source| CliError::Io {
                path: config.clone(),
                source,
            })?;
            let cfg = apply_flags(parse_config(&text)?, &cli)?;
            run(&cfg)
        }
        Command::Figure { scenario, overrides } => {
            let id = ScenarioId::parse(scenario).ok_or_else(|| CliError::Invalid {
                field: "scenario".into(),
                reason: format!("unknown scenario `{scenario}`"),
            })?;
            let cfg = apply_flags(config_from_value(apply_overrides(preset(id), overrides)?)?, &cli)?;
            run(&cfg)
        }
        Command::Accept { only } => {
            let only = only.as_deref().map(parse_criterion).transpose()?;
            let outcomes = run_suite(only)?;
            for o in &outcomes {
                println!("{}", o.line());
            }
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let path = dir.join("acceptance.csv");
            std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                path: dir.clone(),
                source,
            })?;
            std::fs::write(&path, summary_csv(&outcomes)?).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let failed = outcomes.iter().filter(|o| !o.pass).count();
            println!(
                "{} of {} criteria passed; summary in {}",
                outcomes.len() - failed,
                outcomes.len(),
                path.display()
            );
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn apply_flags(mut cfg: ScenarioConfig, cli: &Cli) -> Result<ScenarioConfig> {
    if let Some(out) = &cli.out {
        cfg.output.path = out.clone();
    }
    if let Some(tol) = cli.tol {
        cfg.tolerance = tol;
    }
    if let Some(stats) = cli.stats {
        cfg.physics.statistics = match stats {
            StatsArg::Fd => Statistics::FermiDirac,
            StatsArg::Boltzmann => Statistics::Boltzmann,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cfg: &ScenarioConfig) -> Result<ExitCode> {
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let output = run_scenario(cfg)?;
    for path in output.write(cfg)? {
        println!("wrote {}", path.display());
    }
    for r in &output.reports {
        println!("{r}");
    }
    Ok(ExitCode::SUCCESS)
}
