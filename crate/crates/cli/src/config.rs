//! Flat `key = value` run configuration.
//!
//! ```text
//! # Example chain
//! m0 = 10 -4; 6 4
//! factors = jy+
//! g = tensor_linear(alpha = 1/10)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use dvp_core::admissible::AdmissibleFn;
use dvp_core::intlat::{ChainSpec, IntMat, Variant};

use crate::CliError;

const KEYS: &[&str] = &[
    "m0",
    "m",
    "factors",
    "g",
    "variant",
    "depth",
    "input",
    "builtin",
    "seed",
    "render",
    "wavelets",
    "reduction",
    "reduction_factor",
    "require_reduction",
    "inject",
    "scale",
];

/// Sample source for `decompose` and `dft`.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Zero,
    Constant,
    Random,
    BoxSpline2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Single,
    Double,
    Chain,
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
    base: PathBuf,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| config_err(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(config_err(format!("line {}: unknown key `{key}`", n + 1)));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(config_err(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Ok(RunConfig { values, base: PathBuf::new() })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| config_err(format!("missing key `{key}`")))
    }

    /// The base matrix, from `m0` or its alias `m`.
    pub fn m0(&self) -> Result<IntMat, CliError> {
        let raw = match (self.get("m0"), self.get("m")) {
            (Some(_), Some(_)) => return Err(config_err("give only one of `m0` and `m`")),
            (Some(v), None) | (None, Some(v)) => v,
            (None, None) => return Err(config_err("missing key `m0`")),
        };
        raw.parse().map_err(|e| config_err(format!("m0: {e}")))
    }

    pub fn factors(&self) -> Result<Vec<IntMat>, CliError> {
        match self.get("factors") {
            None => Ok(Vec::new()),
            Some(v) if v.trim().is_empty() => Ok(Vec::new()),
            Some(v) => v
                .split('|')
                .enumerate()
                .map(|(i, f)| f.parse().map_err(|e| config_err(format!("factor {}: {e}", i + 1))))
                .collect(),
        }
    }

    pub fn chain(&self) -> Result<ChainSpec, CliError> {
        ChainSpec::new(self.m0()?, self.factors()?).map_err(|e| config_err(format!("chain: {e}")))
    }

    pub fn window(&self, dim: usize) -> Result<AdmissibleFn<f64>, CliError> {
        AdmissibleFn::parse(self.require("g")?, dim).map_err(|e| config_err(format!("g: {e}")))
    }

    pub fn variant(&self) -> Result<Variant, CliError> {
        self.get("variant").map_or(Ok(Variant::Symmetric), |v| v.parse().map_err(|e| config_err(format!("{e}"))))
    }

    fn parse_key<V: std::str::FromStr>(&self, key: &str) -> Result<Option<V>, CliError>
    where
        V::Err: std::fmt::Display,
    {
        self.get(key).map(|v| v.parse::<V>().map_err(|e| config_err(format!("{key}: {e}")))).transpose()
    }

    pub fn depth(&self) -> Result<Option<usize>, CliError> {
        self.parse_key("depth")
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        Ok(self.parse_key("seed")?.unwrap_or(0))
    }

    pub fn flag(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.parse_key(key)
    }

    pub fn scale(&self) -> Result<Option<i64>, CliError> {
        self.parse_key("scale")
    }

    /// `input` resolved against the directory of the config file.
    pub fn input(&self) -> Option<PathBuf> {
        self.get("input").map(|p| self.base.join(p))
    }

    pub fn builtin(&self) -> Result<Option<Builtin>, CliError> {
        self.get("builtin")
            .map(|b| match b {
                "zero" => Ok(Builtin::Zero),
                "constant" => Ok(Builtin::Constant),
                "random" => Ok(Builtin::Random),
                "boxspline2d" => Ok(Builtin::BoxSpline2d),
                other => Err(config_err(format!("unknown builtin `{other}`"))),
            })
            .transpose()
    }

    pub fn reduction(&self) -> Result<Option<Reduction>, CliError> {
        self.get("reduction")
            .map(|r| match r {
                "single" => Ok(Reduction::Single),
                "double" => Ok(Reduction::Double),
                "chain" => Ok(Reduction::Chain),
                other => Err(config_err(format!("unknown reduction `{other}`"))),
            })
            .transpose()
    }

    pub fn reduction_factor(&self) -> Result<Option<IntMat>, CliError> {
        self.get("reduction_factor")
            .map(|v| v.parse().map_err(|e| config_err(format!("reduction_factor: {e}"))))
            .transpose()
    }

    /// `inject = mr1:<level>` zeroes one congruence class on that level.
    pub fn inject_mr1(&self) -> Result<Option<usize>, CliError> {
        match self.get("inject") {
            None => Ok(None),
            Some(v) => {
                let level = v
                    .strip_prefix("mr1:")
                    .ok_or_else(|| config_err(format!("unknown injection `{v}`, expected mr1:<level>")))?;
                level.trim().parse().map(Some).map_err(|e| config_err(format!("inject: {e}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_chain_and_window() {
        let cfg = RunConfig::parse("m0 = 10 -4; 6 4  # example\nfactors = jy+ | 2 0; 0 1\ng = tensor_linear(alpha = 1/10)\n")
            .unwrap();
        let chain = cfg.chain().unwrap();
        assert_eq!(chain.n(), 2);
        assert_eq!(chain.size(0), 64);
        assert_eq!(chain.size(2), 256);
        assert!(cfg.window(2).is_ok());
        assert_eq!(cfg.variant().unwrap(), Variant::Symmetric);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(RunConfig::parse("mo = 1").is_err());
        assert!(RunConfig::parse("m0 1 2").is_err());
        assert!(RunConfig::parse("m0 = 1\nm0 = 2").is_err());
        let cfg = RunConfig::parse("m0 = 1 x; 0 1").unwrap();
        assert!(cfg.m0().is_err());
        let cfg = RunConfig::parse("m0 = 1 1; 1 1").unwrap();
        assert!(cfg.chain().is_err());
    }
}
