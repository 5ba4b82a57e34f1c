use backstep_cli::{cmd_all, cmd_simulate, cmd_solve_kernel, cmd_validate, Options};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "backstep", version, about = "Backstepping kernel solver and closed-loop simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's [outputs] dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress informational output and passing check lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the kernel equation and write kernel/gain artifacts.
    SolveKernel(Common),
    /// Run the estimate verification suites.
    Validate(Common),
    /// Simulate the closed loop and write norm time series.
    Simulate(Common),
    /// Validate, solve, and simulate in one run.
    All(Common),
}

fn main() {
    let cli = Cli::parse();
    let (common, run): (&Common, fn(&Options) -> _) = match &cli.command {
        Command::SolveKernel(c) => (c, cmd_solve_kernel),
        Command::Validate(c) => (c, cmd_validate),
        Command::Simulate(c) => (c, cmd_simulate),
        Command::All(c) => (c, cmd_all),
    };
    let opts = Options {
        config: common.config.clone(),
        out: common.out.clone(),
        quiet: common.quiet,
    };
    let code = match run(&opts) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}
