//! Run configuration: command-line flags merged over an optional TOML file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ffcircle::arcs::Ratio;
use ffcircle::expsum::ExponentSystem;
use ffcircle::{Error, Field, FieldParams, Result};
use serde::Deserialize;

pub const DEFAULT_SEED: u64 = 20240601;
pub const DEFAULT_LIMIT: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Table,
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// config file, then to the built-in default.
#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Field as `p`, `p,m` or `p,m,modulus` (modulus in `x`).
    #[arg(long, global = true)]
    pub field: Option<String>,
    /// Exponent set `r1,r2,...`.
    #[arg(long, global = true)]
    pub exponents: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub s: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on enumeration sizes.
    #[arg(long, global = true)]
    pub limit: Option<u64>,
    /// Replaces rho (e.g. `1/2`); outputs are stamped nonconforming.
    #[arg(long = "override-rho", global = true)]
    pub override_rho: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with any of the keys above (dashes become underscores).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report exact cyclotomic values alongside floats where available.
    #[arg(long, global = true)]
    pub exact: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    field: Option<String>,
    exponents: Option<String>,
    n: Option<usize>,
    s: Option<usize>,
    seed: Option<u64>,
    limit: Option<u64>,
    override_rho: Option<String>,
    format: Option<Format>,
    out: Option<PathBuf>,
    exact: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub field: Field,
    /// Exponents as given, when given.
    pub exponents: Option<Vec<u32>>,
    pub n: Option<usize>,
    pub s: Option<usize>,
    pub seed: u64,
    pub limit: u64,
    pub override_rho: Option<Ratio>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub exact: bool,
}

fn read_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
}

pub fn parse_exponents(s: &str) -> Result<Vec<u32>> {
    s.split(',').map(|x| x.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent {x:?}")))).collect()
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let field_spec = args.field.clone().or(file.field).unwrap_or_else(|| "2".into());
        let limit = args.limit.or(file.limit).unwrap_or(DEFAULT_LIMIT);
        let field = Field::new(FieldParams::parse(&field_spec)?)?.with_count_limit(limit);
        let exponents = args.exponents.clone().or(file.exponents).map(|s| parse_exponents(&s)).transpose()?;
        let override_rho = args.override_rho.clone().or(file.override_rho).map(|s| Ratio::parse(&s)).transpose()?;
        Ok(RunConfig {
            field,
            exponents,
            n: args.n.or(file.n),
            s: args.s.or(file.s),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            limit,
            override_rho,
            format: args.format.or(file.format).unwrap_or(Format::Table),
            out: args.out.clone().or(file.out),
            exact: args.exact || file.exact.unwrap_or(false),
        })
    }

    /// The exponent system, or `default` when none was given.
    pub fn system_or(&self, default: &[u32]) -> Result<ExponentSystem> {
        let exps = self.exponents.clone().unwrap_or_else(|| default.to_vec());
        ExponentSystem::from_unsorted(&exps, self.field.p())
    }

    pub fn field_label(&self) -> String {
        self.field.params().to_string()
    }
}
