use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dqd_cli::{run, CliError, Mode, RunConfig};

/// Steady states, dynamics, spectra and transport of a degenerate
/// double-quantum-dot heat engine.
#[derive(Debug, Parser)]
#[command(name = "dqd", version)]
struct Args {
    mode: Mode,
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; overrides `output` in the config. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let cfg = RunConfig::load(&args.config)?;
    if args.threads == Some(0) {
        return Err(CliError::Config("--threads: must be at least 1".into()));
    }
    let outcome = run(args.mode, &cfg, args.threads)?;
    match args.out.as_ref().or(cfg.output.as_ref()) {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
            outcome.table.write_to(BufWriter::new(file))?;
        }
        None => outcome.table.write_to(std::io::stdout().lock())?,
    }
    outcome.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dqd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
