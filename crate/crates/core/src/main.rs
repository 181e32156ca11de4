use std::process::ExitCode;

use clap::Parser;
use qcrit::cli::{self, Cli, ExperimentConfig};

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            let err = qcrit::error::Error::InvalidInput(first.to_string());
            eprintln!("{}", cli::error_json(&err));
            return ExitCode::from(2);
        }
    };
    let result = cli::init_threads()
        .and_then(|_| ExperimentConfig::resolve(&args))
        .and_then(|cfg| cli::run(&cfg).and_then(|a| cli::write_artifact(&cfg, &a).map(|_| a)));
    match result {
        Ok(a) if a.success => ExitCode::SUCCESS,
        Ok(_) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("{}", cli::error_json(&e));
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
