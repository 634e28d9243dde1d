use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use surftrap::cli_io::run::{run, RunOptions};

#[derive(Parser)]
#[command(name = "surftrap", version, about = "Trajectory, section and phase-space volume runs for five-wire surface traps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config and the model's self-consistency.
    Validate(Common),
    /// Integrate a single trajectory.
    Simulate(Common),
    /// Poincaré section of a set of launch heights.
    Section(Common),
    /// Last-unbroken-torus sweep over (sqrt_lambda, q5).
    Characterize(Common),
    /// Indicator maps and phase-space volumes.
    Volumes(Common),
    /// Survival of a thermal ensemble under a tickle drive.
    Tickle(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; takes precedence over SURFTRAP_OUT and the config.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let (name, c) = match Cli::parse().command {
        Command::Validate(c) => ("validate", c),
        Command::Simulate(c) => ("simulate", c),
        Command::Section(c) => ("section", c),
        Command::Characterize(c) => ("characterize", c),
        Command::Volumes(c) => ("volumes", c),
        Command::Tickle(c) => ("tickle", c),
    };
    let outcome = run(&RunOptions {
        config: c.config,
        command: Some(name.to_string()),
        out: c.out,
        seed: c.seed,
        threads: c.threads,
    });
    if outcome.status == 0 {
        println!("{}", outcome.message);
    } else {
        eprintln!("surftrap {name}: {}", outcome.message);
    }
    ExitCode::from(outcome.status as u8)
}
