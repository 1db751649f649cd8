use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use pvd_cli::{execute, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    let (text, code, output) = execute(Cli::parse());
    let written = match &output {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("pvd: cannot write report: {e}");
        return ExitCode::from(EXIT_ERROR as u8);
    }
    ExitCode::from(code as u8)
}
