use clap::Parser;

use respclass_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(err) = respclass_cli::run(&cli) {
        eprintln!("error: {err:#}");
        std::process::exit(respclass_cli::exit_code(&err));
    }
}
