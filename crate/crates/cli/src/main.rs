mod args;
mod cmd;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .expect("thread pool is configured once");
    }
    let result = match &cli.command {
        Command::Test(a) => cmd::test::run(a),
        Command::Simulate(a) => cmd::simulate::run(a),
        Command::CopulaIndex(a) => cmd::copula::run(a),
        Command::Group(a) => cmd::group::run(a),
        Command::Fetch(a) => cmd::fetch::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(cmd::exit_code(&e))
        }
    }
}
