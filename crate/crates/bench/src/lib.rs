//! Command-line benchmark for mesh/grid conversion, reconstruction metrics
//! and generative-set metrics. IO, file formats and the CLI live here; the
//! numerics are in `mesh3d-core`.

pub mod cache;
pub mod cli;
pub mod commands;
pub mod error;
pub mod formats;
pub mod inputs;
pub mod manifest;
pub mod obj;
pub mod report;

use cli::{Cli, Command};
use error::{CliError, CliResult};

fn dispatch(command: &Command) -> CliResult<i32> {
    match command {
        Command::Convert(a) => commands::convert(a),
        Command::Reconstruct(a) => commands::reconstruct(a),
        Command::EvalRecon(a) => commands::eval_recon(a),
        Command::EvalGen(a) => commands::eval_gen(a),
        Command::Stability(a) => commands::stability(a),
        Command::BtFit(a) => commands::bt_fit(a),
        Command::Decompose(a) => commands::decompose(a),
    }
}

/// Runs one parsed invocation and returns the process exit code.
pub fn run(cli: &Cli) -> CliResult<i32> {
    match cli.jobs {
        None => dispatch(&cli.command),
        Some(0) => Err(CliError::validation("--jobs must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::validation(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(&cli.command))
        }
    }
}
