use std::process::ExitCode;

use asym_cli::{run, status_line, Cli, CliError};
use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let err: Result<_, CliError> = Err(CliError::Usage(e.kind().to_string()));
            eprintln!("{}", status_line(&err));
            return ExitCode::from(2);
        }
    };
    let result = run(&cli);
    eprintln!("{}", status_line(&result));
    match &result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => ExitCode::from(e.exit_code() as u8),
    }
}
