use std::path::{Path, PathBuf};
use std::process::ExitCode;

use burgers_step::refsolve::SolverSettings;
use burgers_step::residual::RegionKind;
use burgers_step_cli::commands::{self, DEFAULT_RESIDUAL_LADDER, DEFAULT_SIMULATION_LADDER};
use burgers_step_cli::config::ProblemConfig;
use burgers_step_cli::error::{CliError, CliResult};
use burgers_step_cli::output::resolve_out_dir;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Step-like asymptotic solutions of a singularly perturbed Burgers equation.
#[derive(Parser)]
#[command(name = "burgers-step", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Problem description (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides $BURGERS_STEP_OUT, default ./out.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionArg {
    Global,
    Right,
    Left,
}

impl From<RegionArg> for RegionKind {
    fn from(r: RegionArg) -> Self {
        match r {
            RegionArg::Global => RegionKind::Global,
            RegionArg::Right => RegionKind::RightTail,
            RegionArg::Left => RegionKind::LeftTail,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every condition of the construction; writes check.json.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Sample Y_m, V0 and V1 on the config grid for each configured epsilon.
    Build {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
        order: u8,
    },
    /// Residual order study over an epsilon ladder.
    Residual {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
        order: u8,
        /// Regions to study; all three if omitted.
        #[arg(long, value_enum, value_delimiter = ',')]
        region: Vec<RegionArg>,
        #[arg(long, value_delimiter = ',')]
        eps_ladder: Option<Vec<f64>>,
    },
    /// Compare Y_m against the reference finite-difference solver.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
        order: u8,
        #[arg(long, value_delimiter = ',')]
        eps_ladder: Option<Vec<f64>>,
        #[arg(long, default_value_t = SolverSettings::default().nx)]
        nx: usize,
        /// End time; defaults to time.t1 of the config.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Run the embedded worked example end to end.
    Example {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid size of the reference solver.
        #[arg(long, default_value_t = SolverSettings::default().nx)]
        nx: usize,
    },
}

fn load(path: &Path) -> CliResult<ProblemConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    ProblemConfig::from_json(&text)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Check { common } => {
            let config = load(&common.config)?;
            let out = resolve_out_dir(common.out);
            let report = commands::cmd_check(&config, &out)?;
            for item in &report.items {
                println!("{} {}", item.status.as_str(), item.name);
            }
            if !report.passed() {
                let failed: Vec<_> =
                    report.items.iter().filter(|i| !matches!(i.status, commands::Status::Pass)).map(|i| i.name.as_str()).collect();
                return Err(CliError::ConditionsFailed(format!("conditions failed: {}", failed.join(", "))));
            }
        }
        Command::Build { common, order } => {
            let config = load(&common.config)?;
            let out = resolve_out_dir(common.out);
            let built = commands::cmd_build(&config, order as usize, &out)?;
            for path in built.figures.iter().chain([&built.front]) {
                println!("{}", path.display());
            }
        }
        Command::Residual {
            common,
            order,
            region,
            eps_ladder,
        } => {
            let config = load(&common.config)?;
            let out = resolve_out_dir(common.out);
            let regions: Vec<RegionKind> = if region.is_empty() {
                vec![RegionKind::Global, RegionKind::RightTail, RegionKind::LeftTail]
            } else {
                region.into_iter().map(Into::into).collect()
            };
            let ladder = eps_ladder.unwrap_or_else(|| DEFAULT_RESIDUAL_LADDER.to_vec());
            for r in commands::cmd_residual(&config, order as usize, &regions, &ladder, &out)? {
                let slope = r.report.slope.map_or("n/a".to_string(), |s| format!("{s:.4}"));
                println!(
                    "{}: sups {:?}, slope {slope}, ratio {:?}",
                    r.report.region.name(),
                    r.report.sup_residuals,
                    r.boundedness.ratio
                );
            }
        }
        Command::Simulate {
            common,
            order,
            eps_ladder,
            nx,
            t_end,
        } => {
            let config = load(&common.config)?;
            let out = resolve_out_dir(common.out);
            let ladder = eps_ladder.unwrap_or_else(|| DEFAULT_SIMULATION_LADDER.to_vec());
            let settings = SolverSettings {
                nx,
                t_end: t_end.unwrap_or(config.time.t1),
                ..SolverSettings::default()
            };
            let sim = commands::cmd_simulate(&config, order as usize, &ladder, settings, &out)?;
            for run in &sim.comparison.runs {
                println!("eps {}: end-time sup deviation {:e}", run.epsilon, run.end_sup());
            }
            println!("strictly improving: {}", sim.strictly_improving);
        }
        Command::Example { out, nx } => {
            let out = resolve_out_dir(out);
            let summary = commands::cmd_example(&out, nx)?;
            println!("wrote {} figures under {}", summary.figures.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
