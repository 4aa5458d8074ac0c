// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;

/// Pair-potential inversion: forward models, simulation, inversion and
/// bound checks.
#[derive(Debug, Parser)]
#[command(name = "ibi", version)]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "IBI_THREADS", default_value_t = 0)]
    threads: usize,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, env = "IBI_LOG", default_value = "warn")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate g = F(u) by the activity expansion or by simulation.
    Forward(commands::ForwardArgs),
    /// Grand canonical Monte Carlo with checkpoints.
    Simulate(commands::SimulateArgs),
    /// Iterative Boltzmann inversion of a target g.
    Invert(commands::InvertArgs),
    /// Check the class, expansion and cavity inequalities for a potential.
    VerifyBounds(commands::VerifyArgs),
    /// Count connected graphs and trees on n labelled vertices.
    Graphs(commands::GraphsArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    env_logger::Builder::new().filter_level(cli.log_level).format_timestamp(None).init();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(2);
    }
    let res = match &cli.command {
        Command::Forward(a) => commands::forward(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Invert(a) => commands::invert(a),
        Command::VerifyBounds(a) => commands::verify_bounds(a),
        Command::Graphs(a) => commands::graphs(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            eprintln!("run `ibi --help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
