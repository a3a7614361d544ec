use std::process::ExitCode;

use clap::Parser;
use gravimean_cli::commands::{EXIT_OK, EXIT_USAGE};
use gravimean_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli, std::env::args().collect()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("gravimean: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
