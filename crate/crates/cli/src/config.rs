//! Run configuration: defaults, a flat `key = value` file with `[section]`
//! headers, the `ACTCONV_OUT` environment variable and command-line flags,
//! applied in that order.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use actconv::function::by_name;
use actconv::{ApproximantConfig, KernelParams, KindTag, MeasurementGrid, OperatorKind, QuadratureConfig};
use serde::Serialize;
use thiserror::Error;

pub const OUT_ENV: &str = "ACTCONV_OUT";
pub const DEFAULT_OUT: &str = "actconv-out";

const SECTIONS: [&str; 8] = ["run", "kernel", "operator", "grid", "output", "quadrature", "taylor", "iterate"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },

    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] actconv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(format!("unknown format `{other}` (expected csv, json or svg)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KindArg {
    Basic,
    Kantorovich,
    Quadrature,
}

impl From<KindArg> for KindTag {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Basic => KindTag::Basic,
            KindArg::Kantorovich => KindTag::Kantorovich,
            KindArg::Quadrature => KindTag::Quadrature,
        }
    }
}

fn parse_kind(s: &str) -> Result<KindTag, String> {
    match s {
        "basic" => Ok(KindTag::Basic),
        "kantorovich" => Ok(KindTag::Kantorovich),
        "quadrature" => Ok(KindTag::Quadrature),
        other => Err(format!("unknown operator kind `{other}`")),
    }
}

/// `a,b` with `a < b`.
pub fn parse_domain(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected `a,b`, got `{s}`"));
    }
    let a: f64 = parts[0].parse().map_err(|e| format!("`{}`: {e}", parts[0]))?;
    let b: f64 = parts[1].parse().map_err(|e| format!("`{}`: {e}", parts[1]))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("domain must satisfy a < b, got [{a}, {b}]"));
    }
    Ok((a, b))
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<T>().map_err(|e| format!("`{v}`: {e}")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub functions: Vec<String>,
    pub kinds: Vec<KindTag>,
    /// Quadrature-type weights; uniform over 4 samples when absent.
    pub weights: Option<Vec<f64>>,
    pub ns: Vec<u32>,
    pub alpha: f64,
    pub q: f64,
    pub beta: f64,
    pub domain: (f64, f64),
    pub grid_points: usize,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    pub quad_tol: f64,
    pub nodes: usize,
    pub taylor_order: u32,
    pub iterations: usize,
    pub chain: Option<Vec<u32>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            functions: vec!["sin".into()],
            kinds: vec![KindTag::Basic],
            weights: None,
            ns: vec![9, 16, 25, 36, 49],
            alpha: 0.5,
            q: 1.0,
            beta: 1.0,
            domain: (-3.0, 3.0),
            grid_points: 2001,
            output_dir: PathBuf::from(DEFAULT_OUT),
            formats: vec![Format::Csv, Format::Json, Format::Svg],
            quad_tol: 1e-10,
            nodes: 64,
            taylor_order: 2,
            iterations: 3,
            chain: None,
        }
    }
}

fn value_err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

fn scalar<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.trim().parse::<T>().map_err(|e| value_err(key, format!("`{v}`: {e}")))
}

impl RunConfig {
    /// Sets one option by its config-file name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let list_err = |e: String| value_err(key, e);
        match key {
            "q" => self.q = scalar(key, value)?,
            "beta" => self.beta = scalar(key, value)?,
            "alpha" => self.alpha = scalar(key, value)?,
            "n" | "ns" => self.ns = parse_list(value).map_err(list_err)?,
            "kind" | "kinds" => {
                self.kinds = value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(parse_kind)
                    .collect::<Result<_, _>>()
                    .map_err(list_err)?
            }
            "weights" => self.weights = Some(parse_list(value).map_err(list_err)?),
            "fn" | "functions" => self.functions = parse_list(value).map_err(list_err)?,
            "domain" => self.domain = parse_domain(value).map_err(list_err)?,
            "grid_points" | "points" => self.grid_points = scalar(key, value)?,
            "out" | "output_dir" | "dir" => self.output_dir = PathBuf::from(value.trim()),
            "format" | "formats" => self.formats = parse_list(value).map_err(list_err)?,
            "quad_tol" | "tol" => self.quad_tol = scalar(key, value)?,
            "nodes" => self.nodes = scalar(key, value)?,
            "taylor_order" | "order" => self.taylor_order = scalar(key, value)?,
            "iterations" | "r" => self.iterations = scalar(key, value)?,
            "chain" => self.chain = Some(parse_list(value).map_err(list_err)?),
            other => return Err(value_err(other, "unknown option")),
        }
        Ok(())
    }

    /// Applies a config file's contents. `origin` labels error messages.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        let parse_err = |line: usize, message: String| ConfigError::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(section) = line.strip_prefix('[') {
                let name = section
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(i + 1, format!("unterminated section header `{line}`")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(parse_err(i + 1, format!("unknown section `[{name}]`")));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(i + 1, format!("expected `key = value`, got `{line}`")))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| parse_err(i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Checks every field and normalizes `ns` to ascending order without
    /// duplicates.
    pub fn validate(&mut self) -> Result<(), ConfigError> {
        self.params()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(value_err("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        if self.ns.is_empty() {
            return Err(value_err("n", "at least one resolution is required"));
        }
        if self.ns.contains(&0) {
            return Err(value_err("n", "resolutions must be positive"));
        }
        self.ns.sort_unstable();
        self.ns.dedup();
        if self.functions.is_empty() {
            return Err(value_err("fn", "at least one function is required"));
        }
        for name in &self.functions {
            by_name(name, self.half_width())?;
        }
        if self.kinds.is_empty() {
            return Err(value_err("kind", "at least one operator kind is required"));
        }
        if let Some(w) = &self.weights {
            OperatorKind::quadrature(w.clone())?;
        }
        self.grid()?;
        if !(self.quad_tol.is_finite() && self.quad_tol > 0.0) {
            return Err(value_err("quad_tol", format!("must be positive, got {}", self.quad_tol)));
        }
        self.quad_config().validate()?;
        self.approximant_config().validate()?;
        if self.taylor_order == 0 {
            return Err(value_err("taylor_order", "Taylor order N must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(value_err("iterations", "r must be at least 1"));
        }
        if let Some(chain) = &self.chain {
            if chain.is_empty() || chain.contains(&0) {
                return Err(value_err("chain", "needs positive resolutions"));
            }
            if chain.windows(2).any(|w| w[1] < w[0]) {
                return Err(value_err("chain", format!("must be non-decreasing, got {chain:?}")));
            }
        }
        if self.formats.is_empty() {
            return Err(value_err("format", "at least one output format is required"));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<KernelParams, ConfigError> {
        Ok(KernelParams::new(self.q, self.beta)?)
    }

    pub fn operator_kind(&self, tag: KindTag) -> Result<OperatorKind, ConfigError> {
        Ok(match tag {
            KindTag::Basic => OperatorKind::Basic,
            KindTag::Kantorovich => OperatorKind::Kantorovich,
            KindTag::Quadrature => match &self.weights {
                Some(w) => OperatorKind::quadrature(w.clone())?,
                None => OperatorKind::uniform_quadrature(4)?,
            },
        })
    }

    pub fn quad_config(&self) -> QuadratureConfig {
        QuadratureConfig {
            abs_tol: self.quad_tol,
            rel_tol: self.quad_tol,
            ..QuadratureConfig::default()
        }
    }

    pub fn approximant_config(&self) -> ApproximantConfig {
        ApproximantConfig::default().with_nodes(self.nodes)
    }

    pub fn grid(&self) -> Result<MeasurementGrid, ConfigError> {
        Ok(MeasurementGrid::uniform(self.domain.0, self.domain.1, self.grid_points)?)
    }

    /// Largest `|x|` of the domain, used to clamp `abs` and bound `id`.
    pub fn half_width(&self) -> f64 {
        self.domain.0.abs().max(self.domain.1.abs())
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let mut cfg = RunConfig::default();
        let text = "# sweep\n[kernel]\nq = 2\nbeta=0.5\n\n[operator]\nkinds = basic, quadrature\nweights = 0.5,0.5\nn = 36, 9\n[grid]\ndomain = -2, 2 # narrower\npoints = 401\n";
        cfg.apply_text(text, "test.conf").unwrap();
        cfg.validate().unwrap();
        assert_eq!((cfg.q, cfg.beta), (2.0, 0.5));
        assert_eq!(cfg.kinds, vec![KindTag::Basic, KindTag::Quadrature]);
        assert_eq!(cfg.ns, vec![9, 36]);
        assert_eq!(cfg.domain, (-2.0, 2.0));
        assert_eq!(cfg.grid_points, 401);
        assert_eq!(cfg.operator_kind(KindTag::Quadrature).unwrap(), OperatorKind::QuadratureType(vec![0.5, 0.5]));
    }

    #[test]
    fn reports_line_numbers() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_text("q = 1\nbogus = 3\n", "x.conf").unwrap_err();
        assert!(err.to_string().starts_with("x.conf:2:"), "{err}");
        assert!(cfg.apply_text("[nowhere]\n", "x.conf").is_err());
        assert!(cfg.apply_text("q 1\n", "x.conf").is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let cases: [(&str, &str); 8] = [
            ("q", "-1"),
            ("alpha", "1.5"),
            ("n", ""),
            ("fn", "tan"),
            ("weights", "0.3,0.3"),
            ("taylor_order", "0"),
            ("chain", "16,9"),
            ("nodes", "4"),
        ];
        for (key, value) in cases {
            let mut cfg = RunConfig::default();
            cfg.set(key, value).unwrap();
            assert!(cfg.validate().is_err(), "{key} = {value}");
        }
    }

    #[test]
    fn default_is_valid() {
        let mut cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.ns, vec![9, 16, 25, 36, 49]);
        assert_eq!(cfg.operator_kind(KindTag::Quadrature).unwrap(), OperatorKind::uniform_quadrature(4).unwrap());
    }

    #[test]
    fn domain_parsing() {
        assert_eq!(parse_domain("-3,3").unwrap(), (-3.0, 3.0));
        assert!(parse_domain("3,-3").is_err());
        assert!(parse_domain("1").is_err());
    }
}
