mod args;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use circlet::pipeline::StageError;
use clap::Parser;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Stage(#[from] StageError),
    #[error("[config] {0}")]
    Config(String),
    #[error("[output] cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Stage(e) => e.exit_code() as u8,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    let result = match cli.command {
        args::Command::Run(a) => commands::run(&a, false),
        args::Command::Diagram(a) => commands::run(&a, true),
        args::Command::Synth(a) => commands::synth(&a),
        args::Command::Reproduce(a) => commands::reproduce(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
