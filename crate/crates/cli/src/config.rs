//! Command-line flags, environment, config file and their merge.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use assoc_lame::bloch::Sign;
use assoc_lame::verify::{Suite, DEFAULT_SEED};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "alame", version, about = "Bloch solutions and SUSY partners of the associated Lamé potential")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band edges and gaps.
    Edges {
        /// Use the discriminant scan even when closed forms exist.
        #[arg(long, env = "LAME_SCAN")]
        scan: Option<bool>,
    },
    /// Bloch solutions ψ± on a grid, with residuals.
    Solve,
    /// First- or second-order partner potential on a grid.
    Partner {
        /// Transformation order; defaults to 2 when --epsilon2 is given.
        #[arg(long, env = "LAME_ORDER")]
        order: Option<u8>,
    },
    /// Run verification suites.
    Verify {
        /// elliptic, frobenius, bloch, susy or all.
        #[arg(long, env = "LAME_SUITE")]
        suite: Option<String>,
        #[arg(long, env = "LAME_SEED")]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, global = true, env = "LAME_M")]
    pub m: Option<u32>,
    #[arg(long, global = true, env = "LAME_ELL")]
    pub ell: Option<u32>,
    #[arg(long, global = true, env = "LAME_K2")]
    pub k2: Option<f64>,
    #[arg(long, global = true, env = "LAME_ENERGY", allow_hyphen_values = true)]
    pub energy: Option<f64>,
    #[arg(long, global = true, env = "LAME_EPSILON1", allow_hyphen_values = true)]
    pub epsilon1: Option<f64>,
    #[arg(long, global = true, env = "LAME_EPSILON2", allow_hyphen_values = true)]
    pub epsilon2: Option<f64>,
    #[arg(long, global = true, env = "LAME_LAMBDA1", allow_hyphen_values = true)]
    pub lambda1: Option<f64>,
    #[arg(long, global = true, env = "LAME_LAMBDA2", allow_hyphen_values = true)]
    pub lambda2: Option<f64>,
    /// Bloch solution used for non-combination seeds: + or -.
    #[arg(long, global = true, env = "LAME_SIGN", allow_hyphen_values = true)]
    pub sign: Option<String>,
    #[arg(long, global = true, env = "LAME_XMIN", allow_hyphen_values = true)]
    pub xmin: Option<f64>,
    #[arg(long, global = true, env = "LAME_XMAX", allow_hyphen_values = true)]
    pub xmax: Option<f64>,
    #[arg(long, global = true, env = "LAME_SAMPLES")]
    pub samples: Option<usize>,
    #[arg(long, global = true, env = "LAME_FORMAT", value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, env = "LAME_OUTPUT")]
    pub output: Option<PathBuf>,
    /// Also write an SVG line plot to this file.
    #[arg(long, global = true, env = "LAME_PLOT")]
    pub plot: Option<PathBuf>,
    /// key=value file with defaults for any of the options above.
    #[arg(long, global = true, env = "LAME_CONFIG")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Every setting after merging flags, environment, config file and defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub m: u32,
    pub ell: u32,
    pub k2: f64,
    pub energy: Option<f64>,
    pub epsilon1: Option<f64>,
    pub epsilon2: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub sign: Sign,
    pub xmin: Option<f64>,
    pub xmax: Option<f64>,
    pub samples: usize,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub order: Option<u8>,
    pub suite: Suite,
    pub seed: u64,
    pub scan: bool,
}

pub const DEFAULT_M: u32 = 3;
pub const DEFAULT_ELL: u32 = 1;
pub const DEFAULT_K2: f64 = 0.95;
pub const DEFAULT_SAMPLES: usize = 2001;

const KEYS: [&str; 19] = [
    "m", "ell", "k2", "energy", "epsilon1", "epsilon2", "lambda1", "lambda2", "sign", "xmin",
    "xmax", "samples", "format", "output", "plot", "order", "suite", "seed", "scan",
];

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected key=value", origin.display(), n + 1))
        })?;
        let k = k.trim().to_ascii_lowercase().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::Usage(format!(
                "{}:{}: unknown key '{k}'",
                origin.display(),
                n + 1
            )));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

pub fn parse_sign(s: &str) -> Result<Sign, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "+" | "plus" | "+1" | "1" => Ok(Sign::Plus),
        "-" | "minus" | "-1" => Ok(Sign::Minus),
        other => Err(CliError::Usage(format!("sign must be + or -, got '{other}'"))),
    }
}

struct Layer<'a> {
    file: &'a BTreeMap<String, String>,
}

impl Layer<'_> {
    /// Flag or environment value if set, else the config file entry.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config value for '{key}': {e}"))),
        }
    }
}

pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            parse_config_file(&text, path)?
        }
        None => BTreeMap::new(),
    };
    let l = Layer { file: &file };
    let c = &cli.common;
    let (order, suite, seed, scan) = match &cli.command {
        Command::Partner { order } => (*order, None, None, None),
        Command::Verify { suite, seed } => (None, suite.clone(), *seed, None),
        Command::Edges { scan } => (None, None, None, *scan),
        Command::Solve => (None, None, None, None),
    };
    let sign = match l.pick(c.sign.clone(), "sign")? {
        Some(s) => parse_sign(&s)?,
        None => Sign::Plus,
    };
    let suite = match l.pick(suite, "suite")? {
        Some(s) => s.parse::<Suite>().map_err(|e| CliError::Usage(e.to_string()))?,
        None => Suite::All,
    };
    let cfg = RunConfig {
        m: l.pick(c.m, "m")?.unwrap_or(DEFAULT_M),
        ell: l.pick(c.ell, "ell")?.unwrap_or(DEFAULT_ELL),
        k2: l.pick(c.k2, "k2")?.unwrap_or(DEFAULT_K2),
        energy: l.pick(c.energy, "energy")?,
        epsilon1: l.pick(c.epsilon1, "epsilon1")?,
        epsilon2: l.pick(c.epsilon2, "epsilon2")?,
        lambda1: l.pick(c.lambda1, "lambda1")?,
        lambda2: l.pick(c.lambda2, "lambda2")?,
        sign,
        xmin: l.pick(c.xmin, "xmin")?,
        xmax: l.pick(c.xmax, "xmax")?,
        samples: l.pick(c.samples, "samples")?.unwrap_or(DEFAULT_SAMPLES),
        format: l.pick(c.format, "format")?,
        output: l.pick(c.output.clone(), "output")?,
        plot: l.pick(c.plot.clone(), "plot")?,
        order: l.pick(order, "order")?,
        suite,
        seed: l.pick(seed, "seed")?.unwrap_or(DEFAULT_SEED),
        scan: l.pick(scan, "scan")?.unwrap_or(false),
    };
    if cfg.samples < 2 {
        return Err(CliError::Usage(format!("samples must be at least 2, got {}", cfg.samples)));
    }
    for (name, v) in [
        ("k2", Some(cfg.k2)),
        ("energy", cfg.energy),
        ("epsilon1", cfg.epsilon1),
        ("epsilon2", cfg.epsilon2),
        ("lambda1", cfg.lambda1),
        ("lambda2", cfg.lambda2),
        ("xmin", cfg.xmin),
        ("xmax", cfg.xmax),
    ] {
        if v.is_some_and(|v| !v.is_finite()) {
            return Err(CliError::Usage(format!("{name} must be finite")));
        }
    }
    Ok(cfg)
}
