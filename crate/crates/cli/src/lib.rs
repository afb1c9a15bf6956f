//! Library half of the `respclass` binary, exposed so the commands can be
//! tested in-process.

pub mod args;
pub mod commands;
pub mod config;

use args::{Cli, Command};
use respclass::ErrorKind;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Train(a) => commands::train(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::Bootstrap(a) => commands::bootstrap(a),
    }
}

/// Exit status for a failed run: the class of the first library error in
/// the chain; anything else (I/O outside the library) counts as data.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let kind = err.chain().find_map(|e| e.downcast_ref::<respclass::Error>()).map(respclass::Error::kind);
    match kind {
        Some(ErrorKind::Usage) => EXIT_USAGE,
        Some(ErrorKind::Numeric) => EXIT_NUMERIC,
        Some(ErrorKind::Data) | None => EXIT_DATA,
    }
}
