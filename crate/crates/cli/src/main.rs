mod commands;
mod config;
mod series;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use assoc_lame::Error;
use clap::Parser;

use crate::config::{resolve, Cli, Command};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or placement rules: exit 2.
    Usage(String),
    Lib(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(e) => match e {
                Error::Domain(_)
                | Error::Spec(_)
                | Error::Node { .. }
                | Error::DegenerateEnergy { .. } => 2,
                Error::Pole { .. } | Error::Numeric { .. } | Error::Consistency(_) => 3,
            },
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Io(s) => f.write_str(s),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

/// Write through a temporary file in the target directory, then rename.
fn write_atomic(path: &Path, body: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("writing {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(body.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let cfg = resolve(&cli)?;
    let out = match &cli.command {
        Command::Edges { .. } => commands::edges(&cfg)?,
        Command::Solve => commands::solve(&cfg)?,
        Command::Partner { order } => commands::partner(&cfg, cfg.order.or(*order))?,
        Command::Verify { .. } => commands::verify(&cfg)?,
    };
    if let (Some(path), Some(svg)) = (&cfg.plot, &out.svg) {
        write_atomic(path, svg)?;
    }
    match &cfg.output {
        Some(path) => write_atomic(path, &out.body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(out.body.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        }
    }
    for n in &out.notes {
        eprintln!("{n}");
    }
    if let Some(failed) = out.failed {
        eprintln!("verification failed:\n  {failed}");
        return Ok(4);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
