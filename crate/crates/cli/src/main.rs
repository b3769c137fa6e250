use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = qobs_cli::Cli::parse();
    let status = qobs_cli::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(status as u8)
}
