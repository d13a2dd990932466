//! `key = value` configuration files.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Lists are comma separated. Seed lists also accept half-open ranges such
//! as `0..20`. Keys a command does not understand are rejected so typos do
//! not silently fall back to defaults.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use rae_core::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: n + 1,
                    column: 1,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Parse {
                    line: n + 1,
                    column: 1,
                    message: format!("invalid key `{key}`"),
                });
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Parse {
                    line: n + 1,
                    column: 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(KvConfig {
            entries,
            used: RefCell::default(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Override (or add) a setting, as command-line flags do.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_value(key, v),
        }
    }

    pub fn get_list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => {
                let items = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_value(key, s))
                    .collect::<Result<Vec<T>>>()?;
                if items.is_empty() {
                    return Err(Error::Config(format!("`{key}` must not be empty")));
                }
                Ok(items)
            }
        }
    }

    /// Seeds as a list (`1, 4, 9`) or a half-open range (`0..20`).
    pub fn get_seeds(&self, key: &str, default: Vec<u64>) -> Result<Vec<u64>> {
        match self.raw(key).map(str::to_owned) {
            Some(v) if v.contains("..") => {
                let (lo, hi) = v.split_once("..").expect("checked");
                let lo: u64 = parse_value(key, lo.trim())?;
                let hi: u64 = parse_value(key, hi.trim())?;
                if lo >= hi {
                    return Err(Error::Config(format!("`{key}` range {v} is empty")));
                }
                Ok((lo..hi).collect())
            }
            Some(_) => self.get_list(key, default),
            None => Ok(default),
        }
    }

    /// Fail on keys that were never read.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("unknown config keys: {}", unknown.join(", "))))
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_lists_and_ranges() {
        let c = KvConfig::parse("# frontier\nnum_actions = 10\ngammas = 0.1, 1 # two\nseeds = 3..6\n\n").unwrap();
        assert_eq!(c.get("num_actions", 0usize).unwrap(), 10);
        assert_eq!(c.get_list::<f64>("gammas", vec![]).unwrap(), vec![0.1, 1.0]);
        assert_eq!(c.get_seeds("seeds", vec![]).unwrap(), vec![3, 4, 5]);
        assert_eq!(c.get("epsilon", 0.5).unwrap(), 0.5);
        c.finish().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let c = KvConfig::parse("gamas = 1").unwrap();
        assert_eq!(c.finish().unwrap_err().kind(), "config");
    }

    #[test]
    fn malformed_lines_report_position() {
        match KvConfig::parse("a = 1\nnonsense\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(KvConfig::parse("a = 1\na = 2").is_err());
        let c = KvConfig::parse("n = ten").unwrap();
        assert_eq!(c.get("n", 1usize).unwrap_err().kind(), "config");
    }
}
