//! Run settings: command-line flags over a `key = value` file over defaults.
//! The cache directory also honours `COTLAB_CACHE`, which sits between the
//! flag and the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use cotlab::gseries::{GMethod, DEFAULT_TERMS, DEFAULT_TOLERANCE};
use cotlab::moments::Normalization;

use crate::output::Format;
use crate::CliError;

pub const CACHE_ENV: &str = "COTLAB_CACHE";
const DEFAULT_CACHE_DIR: &str = ".cotlab-cache";
const DEFAULT_SEED: u64 = 42;
const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Plain-text `key = value` file with defaults for these flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Direct-series cap N (estimates use N and 2N)
    #[arg(long, global = true)]
    pub n_terms: Option<usize>,
    /// Fourier-series cap M (estimates use M and 2M)
    #[arg(long, global = true)]
    pub m_terms: Option<usize>,
    /// Estimator for g: direct, fourier or cross-checked
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// Moment normalization: pi or two-pi
    #[arg(long, global = true)]
    pub normalization: Option<String>,
    /// Spread above which a g estimate is flagged
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Apply Fejer damping to the Fourier route
    #[arg(long, global = true)]
    pub fejer: bool,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output format: csv or json
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Write data here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub samples: usize,
    pub n_terms: usize,
    pub m_terms: usize,
    pub method: GMethod,
    pub normalization: Normalization,
    pub tolerance: f64,
    pub fejer: bool,
    pub cache_dir: PathBuf,
    pub workers: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "seed",
    "samples",
    "n_terms",
    "m_terms",
    "method",
    "normalization",
    "tolerance",
    "fejer",
    "cache_dir",
    "workers",
    "format",
    "out",
];

pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", no + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key {key:?}", no + 1)));
        }
        map.insert(key, v.trim().to_owned());
    }
    Ok(map)
}

fn from_file<T: FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    file.get(key)
        .map(|v| v.parse().map_err(|_| CliError::Usage(format!("config key {key}: cannot parse {v:?}"))))
        .transpose()
}

fn parse_method(s: &str) -> Result<GMethod, CliError> {
    GMethod::parse(s).ok_or_else(|| CliError::Usage(format!("unknown method {s:?} (direct, fourier, cross-checked)")))
}

fn parse_normalization(s: &str) -> Result<Normalization, CliError> {
    Normalization::parse(s).ok_or_else(|| CliError::Usage(format!("unknown normalization {s:?} (pi, two-pi)")))
}

fn parse_format(s: &str) -> Result<Format, CliError> {
    Format::parse(s).ok_or_else(|| CliError::Usage(format!("unknown format {s:?} (csv, json)")))
}

impl Settings {
    pub fn resolve(args: &CommonArgs, env_cache: Option<String>) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let method = match args.method.as_deref().or(file.get("method").map(String::as_str)) {
            Some(s) => parse_method(s)?,
            None => GMethod::Fourier,
        };
        let normalization = match args.normalization.as_deref().or(file.get("normalization").map(String::as_str)) {
            Some(s) => parse_normalization(s)?,
            None => Normalization::Pi,
        };
        let format = match args.format.as_deref().or(file.get("format").map(String::as_str)) {
            Some(s) => parse_format(s)?,
            None => Format::Csv,
        };
        let cache_dir = args
            .cache_dir
            .clone()
            .or(env_cache.filter(|s| !s.is_empty()).map(PathBuf::from))
            .or(file.get("cache_dir").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
        let settings = Settings {
            seed: args.seed.or(from_file(&file, "seed")?).unwrap_or(DEFAULT_SEED),
            samples: args.samples.or(from_file(&file, "samples")?).unwrap_or(DEFAULT_SAMPLES),
            n_terms: args.n_terms.or(from_file(&file, "n_terms")?).unwrap_or(DEFAULT_TERMS),
            m_terms: args.m_terms.or(from_file(&file, "m_terms")?).unwrap_or(DEFAULT_TERMS),
            method,
            normalization,
            tolerance: args.tolerance.or(from_file(&file, "tolerance")?).unwrap_or(DEFAULT_TOLERANCE),
            fejer: args.fejer || from_file(&file, "fejer")?.unwrap_or(false),
            cache_dir,
            workers: args.workers.or(from_file(&file, "workers")?),
            format,
            out: args.out.clone().or(file.get("out").map(PathBuf::from)),
        };
        if settings.workers == Some(0) {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        if !(settings.tolerance > 0.0) {
            return Err(CliError::Usage("--tolerance must be positive".into()));
        }
        Ok(settings)
    }

    pub fn cache_dir(&self) -> &Path {
        &self.cache_dir
    }
}
