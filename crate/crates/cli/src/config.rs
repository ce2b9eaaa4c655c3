//! Effective configuration: built-in defaults, then the config file, then
//! command line flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use iwasawa_core::report::RunConfig;

/// Overrides the default configuration directory.
pub const CONFIG_DIR_ENV: &str = "IWASAWA_CONFIG_DIR";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Args, Debug, Default)]
pub struct Flags {
    /// Prime p.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Report precision N (digits).
    #[arg(long, global = true)]
    pub prec: Option<u32>,
    /// Truncation degree M: series are computed modulo x^M.
    #[arg(long, global = true)]
    pub trunc: Option<usize>,
    /// Finite level n, for computations in GL2(Z/p^n).
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// Character spec file; `intertwine` takes two (source, then target).
    #[arg(long = "char", value_name = "FILE", global = true)]
    pub char_files: Vec<String>,
    /// Integer matrix file for `duality` (one row per line).
    #[arg(long = "matrix", value_name = "FILE", global = true)]
    pub matrix_file: Option<String>,
    /// Probe generator omega_{p^k}(x)^ell.
    #[arg(long, global = true)]
    pub k: Option<u32>,
    /// Probe generator exponent and obstruction length.
    #[arg(long, global = true)]
    pub ell: Option<u32>,
    /// Torus samples, comma separated (units of Z_p).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, global = true)]
    pub samples: Option<Vec<i64>>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `obstruction`: value of c (integer or fraction, e.g. 1/4).
    #[arg(long, allow_hyphen_values = true, global = true)]
    pub c: Option<String>,
    /// `obstruction`: highest coefficient computed.
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// `nilpotency` / `nakayama`: subgroup name.
    #[arg(long, global = true)]
    pub subgroup: Option<String>,
    /// `intertwine`: compare chi with chi * (a/d)^SHIFT.
    #[arg(long, allow_negative_numbers = true, global = true)]
    pub shift: Option<i64>,
    /// Config file (default: config.json in the config directory).
    #[arg(long, value_name = "FILE", global = true)]
    pub config: Option<PathBuf>,
    /// Write the report here; without it the report goes to stdout and the
    /// summary to stderr.
    #[arg(long, value_name = "FILE", global = true)]
    pub out: Option<PathBuf>,
}

/// `$IWASAWA_CONFIG_DIR`, else `$XDG_CONFIG_HOME/iwasawa`, else
/// `$HOME/.config/iwasawa`.
pub fn config_dir() -> Option<PathBuf> {
    let var = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
    var(CONFIG_DIR_ENV)
        .or_else(|| var("XDG_CONFIG_HOME").map(|d| d.join("iwasawa")))
        .or_else(|| var("HOME").map(|d| d.join(".config").join("iwasawa")))
}

fn load_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    RunConfig::from_json(&text).with_context(|| format!("in config {}", path.display()))
}

pub fn resolve(flags: &Flags) -> Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => load_file(path)?,
        None => match config_dir().map(|d| d.join(CONFIG_FILE)) {
            Some(path) if path.is_file() => load_file(&path)?,
            _ => RunConfig::default(),
        },
    };
    macro_rules! apply {
        ($($field:ident),*) => {
            $(if let Some(v) = flags.$field.clone() {
                cfg.$field = v;
            })*
        };
    }
    apply!(p, prec, trunc, level, k, ell, samples, seed);
    if !flags.char_files.is_empty() {
        cfg.char_files = flags.char_files.clone();
    }
    macro_rules! apply_opt {
        ($($field:ident),*) => {
            $(if flags.$field.is_some() {
                cfg.$field = flags.$field.clone();
            })*
        };
    }
    apply_opt!(matrix_file, c, degree, subgroup, shift);
    Ok(cfg)
}
