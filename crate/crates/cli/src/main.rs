use std::process::ExitCode;

use clap::Parser;

use quadiff_cli::parse::ConfigFile;
use quadiff_cli::{execute, Cli, CliError};

fn load_config() -> Result<ConfigFile, CliError> {
    match std::env::var_os("QD_CONFIG") {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| CliError::Usage(format!("QD_CONFIG {}: {e}", p.to_string_lossy())))?;
            ConfigFile::parse(&text).map_err(CliError::Usage)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_config().and_then(|cfg| execute(&cli, &cfg, &mut std::io::stdout().lock()));
    match result {
        Ok(outcome) => {
            for line in &outcome.summary {
                eprintln!("{line}");
            }
            for line in &outcome.numerical {
                eprintln!("numerical failure: {line}");
            }
            for line in &outcome.failures {
                eprintln!("validation failure: {line}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
