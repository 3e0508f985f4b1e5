use clap::Parser;
use csvortex::Mode;
use std::path::PathBuf;
use std::process::ExitCode;

/// Solve generalized self-dual Chern–Simons vortex equations.
#[derive(Parser, Debug)]
#[command(name = "csvortex", version)]
struct Cli {
    mode: Mode,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coupling λ; replaces the config's coupling block.
    #[arg(long)]
    lambda: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match csvortex::execute(cli.mode, &cli.config, cli.out, cli.lambda) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("csvortex: {e:#}");
            ExitCode::from(1)
        }
    }
}
