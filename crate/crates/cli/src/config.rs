//! Flat `key = value` configuration files.
//!
//! Keys are the long flag names without the leading dashes. Blank lines and
//! lines starting with `#` are ignored. Only `axis` may repeat.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::{CliError, Result};

pub const KNOWN_KEYS: &[&str] = &[
    "axis", "b-a", "b-b", "bonds", "cycle", "epsilon", "format", "J-a", "J-b", "J-list", "jobs",
    "levels-a", "levels-b", "model", "output", "periodic", "reference", "sites", "svg", "t-cold",
    "t-hot", "t-range", "temperature",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, Vec<String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!("config line {}: expected `key = value`", n + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::usage(format!("config line {}: unknown key `{key}`", n + 1)));
            }
            let slot = entries.entry(key.to_string()).or_default();
            if !slot.is_empty() && key != "axis" {
                return Err(CliError::usage(format!("config line {}: duplicate key `{key}`", n + 1)));
            }
            slot.push(value.to_string());
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).and_then(|v| v.first()).map(String::as_str)
    }

    pub fn get_all(&self, key: &str) -> &[String] {
        self.entries.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `flag` if given, otherwise the parsed file value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::usage(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}
