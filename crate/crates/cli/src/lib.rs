//! Command-line front end: input parsing, subcommand dispatch and
//! deterministic JSON reports.

pub mod config;
pub mod error;
pub mod input;
pub mod report;

pub use config::{Cli, Command, CommonArgs, IpPreset, RunConfig};
pub use error::CliError;
pub use input::{load_matrix, InputFormat, LoadedMatrix};
pub use report::{run, ErrorReport, Report};

/// Exit status when a report has a failing certificate.
pub const EXIT_CERTIFICATE_FAILED: i32 = 1;
/// Exit status for input, usage and computation errors.
pub const EXIT_ERROR: i32 = 2;

/// Runs one parsed invocation and returns the report text and exit code.
pub fn execute(cli: Cli) -> (String, i32, Option<std::path::PathBuf>) {
    let command = cli.command;
    let output = cli.args.output.clone();
    match RunConfig::resolve(command, cli.args).and_then(|cfg| run(&cfg)) {
        Ok(rep) => {
            let code = if rep.all_pass { 0 } else { EXIT_CERTIFICATE_FAILED };
            (report::to_json(&rep), code, output)
        }
        Err(e) => (report::to_json(&ErrorReport::new(command, &e)), EXIT_ERROR, output),
    }
}
