use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cogbeam_cli::commands::{self, AnalyticArgs, EsparArgs, Function, LevelArg, SimulateArgs, ValidateArgs};
use cogbeam_cli::PresetName;

/// Multiuser interference diversity simulator for underlay cognitive radio.
///
/// Every flag can also be set through an environment variable with the
/// `COGBEAM_` prefix, e.g. `COGBEAM_SEED=7`.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "COGBEAM_CONFIG")]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true, env = "COGBEAM_SEED")]
    seed: Option<u64>,
    /// Monte-Carlo trials per grid point (overrides the config).
    #[arg(long, global = true, env = "COGBEAM_TRIALS")]
    trials: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "COGBEAM_THREADS")]
    threads: Option<usize>,
    /// Output path (CSV).
    #[arg(long, global = true, env = "COGBEAM_OUT")]
    out: Option<PathBuf>,
    /// Experiment preset (overrides the config).
    #[arg(long, global = true, env = "COGBEAM_PRESET", value_enum)]
    preset: Option<PresetName>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a capacity sweep and write CSV.
    Simulate {
        /// Print the effective configuration as TOML and exit.
        #[arg(long)]
        emit_config: bool,
    },
    /// Run the self-check suite; exit status 0 iff every check passes.
    Validate {
        #[arg(long, value_enum, default_value = "fast", env = "COGBEAM_LEVEL")]
        level: LevelArg,
        /// Scale Lambert W values by this factor (fault injection).
        #[arg(long, default_value_t = 1.0, hide = true)]
        perturb_lambert: f64,
    },
    /// Export an ESPAR radiation pattern and a basis orthonormality report.
    Espar {
        /// Number of elements M (overrides the config).
        #[arg(long)]
        elements: Option<usize>,
        /// Parasitic reactances in ohms, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        reactances: Option<Vec<f64>>,
        /// Angular grid size.
        #[arg(long)]
        grid: Option<usize>,
        /// Report path (default: next to the pattern CSV).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Tabulate a closed-form expression over a grid.
    Analytic {
        #[arg(long, value_enum)]
        function: Function,
        #[arg(long, default_value_t = 0.0)]
        k: f64,
        /// Mean power ratio γ̄_sp/γ̄_s.
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 10.0)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Log-spaced grid.
        #[arg(long)]
        log: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Simulate { emit_config } => commands::simulate(&SimulateArgs {
            config: cli.config,
            preset: cli.preset,
            seed: cli.seed,
            trials: cli.trials,
            out: cli.out,
            emit_config,
        }),
        Command::Validate { level, perturb_lambert } => commands::validate(&ValidateArgs {
            level,
            out: cli.out,
            lambert_scale: perturb_lambert,
        }),
        Command::Espar {
            elements,
            reactances,
            grid,
            report,
        } => commands::espar(&EsparArgs {
            config: cli.config,
            elements,
            reactances,
            grid,
            out: cli.out.unwrap_or_else(|| PathBuf::from("espar_pattern.csv")),
            report,
        }),
        Command::Analytic {
            function,
            k,
            rho,
            from,
            to,
            points,
            log,
        } => commands::analytic(&AnalyticArgs {
            function,
            k_factor: k,
            rho,
            from,
            to,
            points,
            log_spaced: log,
            out: cli.out,
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .expect("thread pool");
    match pool.install(|| run(cli)) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
