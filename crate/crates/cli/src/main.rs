use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grekit_core::reports::{execute, Command, ExitStatus, RunManifest};

/// Relative-entropy checks for positive operators and two model schemes.
#[derive(Parser, Debug)]
#[command(name = "grekit", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Fuzz the pointwise inequality on random positive matrices.
    VerifyLr(FuzzArgs),
    /// Fuzz the entropy contraction on random (sub)stochastic matrices.
    VerifyCsiszar(FuzzArgs),
    /// Trace the entropy along powers of a stochastic matrix.
    PowerIterate(PowerArgs),
    /// Run the growth-fragmentation scheme.
    SimulateGrowth(SimArgs),
    /// Run the slab transport scheme.
    SimulateTransport(SimArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Optional TOML (or .json) config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Args, Debug)]
struct PowerArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[command(flatten)]
    common: Common,
    /// Named preset, used when no config is given.
    #[arg(long)]
    preset: Option<String>,
}

fn manifest(command: Command, common: Common) -> RunManifest {
    RunManifest { config: common.config, ..RunManifest::new(command, common.out) }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(ExitStatus::Usage.code() as u8) } else { ExitCode::SUCCESS };
        }
    };
    let run = match cli.command {
        Cmd::VerifyLr(a) => RunManifest { seed: a.seed, trials: a.trials, ..manifest(Command::VerifyLr, a.common) },
        Cmd::VerifyCsiszar(a) => {
            RunManifest { seed: a.seed, trials: a.trials, ..manifest(Command::VerifyCsiszar, a.common) }
        }
        Cmd::PowerIterate(a) => RunManifest { seed: a.seed, ..manifest(Command::PowerIterate, a.common) },
        Cmd::SimulateGrowth(a) => RunManifest { preset: a.preset, ..manifest(Command::SimulateGrowth, a.common) },
        Cmd::SimulateTransport(a) => {
            RunManifest { preset: a.preset, ..manifest(Command::SimulateTransport, a.common) }
        }
    };
    log::info!("running {} into {}", run.command.name(), run.output_dir.display());
    let outcome = execute(&run);
    for line in &outcome.summary {
        if outcome.status == ExitStatus::Pass {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    for file in &outcome.files {
        println!("wrote {}", file.display());
    }
    ExitCode::from(outcome.status.code() as u8)
}
