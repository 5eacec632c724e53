use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fdqme::measures::GapMethod;
use fdqme_cli::config::{parse_config, ScenarioKind};
use fdqme_cli::scenarios::RunOptions;

#[derive(Parser)]
#[command(name = "fdqme", version, about = "Frequency-domain open quantum system scenarios")]
struct Cli {
    /// Print the available scenarios and exit.
    #[arg(long)]
    list_scenarios: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    ThermalSpectrum(RunArgs),
    SqueezedSpectrum(RunArgs),
    WaveguideSpectrum(RunArgs),
    MeasureSweep(RunArgs),
    BlpCompare(RunArgs),
    Positivity(RunArgs),
    OracleCompare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Markovian bandwidth for N_S: `eigen` or `fwhm`.
    #[arg(long, default_value = "eigen")]
    gap: GapMethod,
    /// Keep the sum-frequency terms of the Redfield generator.
    #[arg(long)]
    include_sum_frequency: bool,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn split(self) -> (ScenarioKind, RunArgs) {
        match self {
            Self::ThermalSpectrum(a) => (ScenarioKind::ThermalSpectrum, a),
            Self::SqueezedSpectrum(a) => (ScenarioKind::SqueezedSpectrum, a),
            Self::WaveguideSpectrum(a) => (ScenarioKind::WaveguideSpectrum, a),
            Self::MeasureSweep(a) => (ScenarioKind::MeasureSweep, a),
            Self::BlpCompare(a) => (ScenarioKind::BlpCompare, a),
            Self::Positivity(a) => (ScenarioKind::Positivity, a),
            Self::OracleCompare(a) => (ScenarioKind::OracleCompare, a),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.list_scenarios {
        for k in ScenarioKind::ALL {
            println!("{:<20} {}", k.tag(), k.description());
        }
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("no scenario given; see --help or --list-scenarios");
        return ExitCode::from(2);
    };
    let (kind, args) = command.split();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let cfg = match parse_config(&text, kind) {
        Ok(c) => c,
        Err(errors) => {
            eprintln!("error: invalid configuration {}:", args.config.display());
            for e in errors {
                eprintln!("  - {e}");
            }
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        gap: args.gap,
        include_sum_frequency: args.include_sum_frequency,
    };
    log::info!("running {kind}");
    match fdqme_cli::run_and_write(&cfg, &opts, args.out.as_deref()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
