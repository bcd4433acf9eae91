//! Command-line harness: sweeps the operators over catalog functions and
//! writes measured errors next to their theoretical bounds.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

pub use commands::Outcome;
pub use config::{ConfigError, Format, KindArg, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "actconv", version, about = "Convergence and bound checks for activated convolution operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalization, symmetry, maximum, tail and moment checks of the kernel.
    KernelCheck(RunArgs),
    /// Sup error against the Jackson-type bound over a sweep of n.
    Approx(RunArgs),
    /// Taylor-corrected residual against its bound.
    Taylor(RunArgs),
    /// Iterated operator, or a mixed chain with --chain.
    Iterate(RunArgs),
    /// Index of the JSON summaries in the output directory.
    Report(RunArgs),
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Self::KernelCheck(a) | Self::Approx(a) | Self::Taylor(a) | Self::Iterate(a) | Self::Report(a) => a,
        }
    }
}

#[derive(Debug, Default, Clone, Args)]
pub struct RunArgs {
    /// Config file of `key = value` lines with `[section]` headers.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Resolution; repeat or separate with commas.
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<u32>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub kind: Vec<KindArg>,
    /// Quadrature-type weights w1,...,wr.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub weights: Option<Vec<f64>>,
    /// Catalog function; repeat or separate with commas.
    #[arg(long = "fn", value_name = "NAME", value_delimiter = ',')]
    pub functions: Vec<String>,
    #[arg(long, value_name = "A,B", allow_hyphen_values = true, value_parser = config::parse_domain)]
    pub domain: Option<(f64, f64)>,
    #[arg(long, value_name = "P")]
    pub grid_points: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
    #[arg(long, value_name = "T")]
    pub quad_tol: Option<f64>,
    /// Grid approximant nodes.
    #[arg(long, value_name = "K")]
    pub nodes: Option<usize>,
    #[arg(long, value_name = "N")]
    pub taylor_order: Option<u32>,
    #[arg(long, value_name = "R")]
    pub iterations: Option<usize>,
    #[arg(long, value_name = "K1,K2,...", value_delimiter = ',')]
    pub chain: Option<Vec<u32>>,
}

impl RunArgs {
    /// Defaults, then the config file, then `out_env`, then flags.
    pub fn resolve(&self, out_env: Option<String>) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(dir) = out_env.filter(|d| !d.is_empty()) {
            cfg.output_dir = PathBuf::from(dir);
        }
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(v) = self.q {
            cfg.q = v;
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if !self.n.is_empty() {
            cfg.ns = self.n.clone();
        }
        if !self.kind.is_empty() {
            cfg.kinds = self.kind.iter().map(|&k| k.into()).collect();
        }
        if let Some(w) = &self.weights {
            cfg.weights = Some(w.clone());
        }
        if !self.functions.is_empty() {
            cfg.functions = self.functions.clone();
        }
        if let Some(d) = self.domain {
            cfg.domain = d;
        }
        if let Some(v) = self.grid_points {
            cfg.grid_points = v;
        }
        if let Some(dir) = &self.out {
            cfg.output_dir = dir.clone();
        }
        if !self.format.is_empty() {
            cfg.formats = self.format.clone();
        }
        if let Some(v) = self.quad_tol {
            cfg.quad_tol = v;
        }
        if let Some(v) = self.nodes {
            cfg.nodes = v;
        }
        if let Some(v) = self.taylor_order {
            cfg.taylor_order = v;
        }
        if let Some(v) = self.iterations {
            cfg.iterations = v;
        }
        if let Some(c) = &self.chain {
            cfg.chain = Some(c.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs a parsed command against a resolved configuration.
pub fn run(command: &Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::KernelCheck(_) => commands::cmd_kernel_check(cfg),
        Command::Approx(_) => commands::cmd_approx(cfg),
        Command::Taylor(_) => commands::cmd_taylor(cfg),
        Command::Iterate(_) => commands::cmd_iterate(cfg),
        Command::Report(_) => commands::cmd_report(cfg),
    }
}
