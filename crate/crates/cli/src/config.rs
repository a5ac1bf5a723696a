//! Flat `key = value` configuration files.

use std::path::Path;

use salem_core::params::ParamOverrides;
use salem_core::{derive_params, ConstructionParams};

use crate::error::CliError;

pub const KEYS: &[&str] = &[
    "N0",
    "t0",
    "n0",
    "j_max",
    "seed",
    "c_eta",
    "c_rot",
    "ap_offset",
    "ap_gap",
    "k_budget",
    "max_retries",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub base_n: Option<u64>,
    pub t0: Option<u64>,
    pub n0: Option<u32>,
    pub overrides: ParamOverrides,
}

fn value<T: std::str::FromStr>(key: &str, raw: &str, line: usize) -> Result<T, CliError> {
    raw.parse().map_err(|_| {
        CliError::input(format!("line {line}: `{key}` has invalid value {raw:?}"))
    })
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut config = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line.split_once('=').ok_or_else(|| {
                CliError::input(format!("line {}: expected `key = value`, found {raw:?}", i + 1))
            })?;
            config.set(key.trim(), val.trim(), i + 1)?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one `key=value` pair; `line` is only used in messages.
    pub fn set(&mut self, key: &str, val: &str, line: usize) -> Result<(), CliError> {
        let o = &mut self.overrides;
        match key {
            "N0" => self.base_n = Some(value(key, val, line)?),
            "t0" => self.t0 = Some(value(key, val, line)?),
            "n0" => self.n0 = Some(value(key, val, line)?),
            "j_max" => o.j_max = Some(value(key, val, line)?),
            "seed" => o.seed = Some(value(key, val, line)?),
            "c_eta" => o.c_eta = Some(value(key, val, line)?),
            "c_rot" => o.c_rot = Some(value(key, val, line)?),
            "ap_offset" => o.ap_offset = Some(value(key, val, line)?),
            "ap_gap" => o.ap_gap = Some(value(key, val, line)?),
            "k_budget" => o.k_budget = Some(value(key, val, line)?),
            "max_retries" => o.max_retries = Some(value(key, val, line)?),
            _ => {
                return Err(CliError::input(format!(
                    "line {line}: unknown key `{key}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ConstructionParams, CliError> {
        let missing = |k: &str| CliError::input(format!("config is missing required key `{k}`"));
        let base_n = self.base_n.ok_or_else(|| missing("N0"))?;
        let t0 = self.t0.ok_or_else(|| missing("t0"))?;
        let n0 = self.n0.ok_or_else(|| missing("n0"))?;
        Ok(derive_params(base_n, t0, n0, &self.overrides)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_desk_config() {
        let c = Config::parse("# desk\nN0 = 4\nt0=2\n n0 = 1 \nj_max = 5 # five levels\nseed = 7\n").unwrap();
        let p = c.params().unwrap();
        assert_eq!((p.n, p.t, p.j_max, p.seed), (16, 4, 5, 7));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(Config::parse("N0 4").is_err());
        assert!(Config::parse("N0 = four").is_err());
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse("N0 = 4\nt0 = 2").unwrap().params().is_err());
        let err = Config::parse("N0 = 4\nt0 = 4\nn0 = 1").unwrap().params().unwrap_err();
        assert_eq!(err.code, crate::error::EXIT_INPUT);
    }
}
