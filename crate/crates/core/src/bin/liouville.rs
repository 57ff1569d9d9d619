use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use liouville::cli_io::execute;

/// Radial solutions, energies and linearized systems of singular Liouville
/// systems.
#[derive(Debug, Parser)]
#[command(name = "liouville", version)]
struct Cli {
    /// Must agree with the `command` field of the config.
    #[arg(value_parser = [
        "validate", "solve", "energy", "shoot", "linearize", "modes", "sample", "oracle", "suite",
    ])]
    command: String,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.json and CSV output.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Overrides the seed given in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = execute(&cli.command, &cli.config, &cli.out_dir, cli.seed);
    ExitCode::from(code as u8)
}
