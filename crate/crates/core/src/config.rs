//! Flat `section.key = value` configuration text.
//!
//! Blank lines and lines starting with `#` are ignored. A later assignment
//! to the same key replaces the earlier one, which is how command-line
//! overrides are layered on top of a file.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl FromStr for KvConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = KvConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::parse(format!("line {}: expected `key = value`, got {line:?}", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::parse(format!("line {}: bad key {key:?}", lineno + 1)));
            }
            cfg.set(key, value.trim());
        }
        Ok(cfg)
    }
}

impl KvConfig {
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Parses the value under `key`, if present.
    pub fn parse<V: FromStr>(&self, key: &str) -> Result<Option<V>>
    where
        V::Err: std::fmt::Display,
    {
        self.get(key).map(|v| v.parse::<V>().map_err(|e| Error::parse(format!("{key} = {v:?}: {e}")))).transpose()
    }

    pub fn parse_or<V: FromStr>(&self, key: &str, default: V) -> Result<V>
    where
        V::Err: std::fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    /// Comma- or whitespace-separated list.
    pub fn list<V: FromStr>(&self, key: &str) -> Result<Option<Vec<V>>>
    where
        V::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<V>().map_err(|e| Error::parse(format!("{key}: item {s:?}: {e}"))))
                    .collect()
            })
            .transpose()
    }

    /// Entries under `prefix.`, with the prefix stripped.
    pub fn section(&self, prefix: &str) -> KvConfig {
        let dotted = format!("{prefix}.");
        KvConfig { entries: self.entries.iter().filter_map(|(k, v)| k.strip_prefix(&dotted).map(|s| (s.to_string(), v.clone()))).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Canonical `key = value` rendering, sorted by key.
    pub fn to_canonical_string(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
