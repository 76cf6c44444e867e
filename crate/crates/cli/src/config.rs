//! Flat `key = value` configuration with dotted keys.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub struct Key {
    pub name: &'static str,
    pub default: String,
    pub help: &'static str,
}

impl Key {
    pub fn new(name: &'static str, default: impl ToString, help: &'static str) -> Self {
        Self {
            name,
            default: default.to_string(),
            help,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<removal_attrib::Error> for ConfigError {
    fn from(e: removal_attrib::Error) -> Self {
        ConfigError(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Resolved values for one command; every lookup is of a registered key.
pub struct Config {
    values: BTreeMap<&'static str, String>,
}

fn suggestion(keys: &[Key], unknown: &str) -> String {
    let best = keys
        .iter()
        .map(|k| (strsim::jaro_winkler(unknown, k.name), k.name))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((_, name)) => format!("unknown key {unknown:?}; did you mean {name:?}?"),
        None => format!("unknown key {unknown:?}"),
    }
}

/// Split `key=value`, tolerating spaces around the `=`.
fn split_pair(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    Some((k.trim(), v.trim()))
}

impl Config {
    pub fn new(keys: &[Key]) -> Self {
        Self {
            values: keys.iter().map(|k| (k.name, k.default.clone())).collect(),
        }
    }

    pub fn set(&mut self, keys: &[Key], key: &str, value: &str) -> Result<()> {
        match keys.iter().find(|k| k.name == key) {
            Some(k) => {
                self.values.insert(k.name, value.to_string());
                Ok(())
            }
            None => Err(ConfigError(suggestion(keys, key))),
        }
    }

    /// Apply a config file: one `key = value` per line, `#` starts a comment.
    pub fn load_file(&mut self, keys: &[Key], path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_pair(line).ok_or_else(|| {
                ConfigError(format!("{}:{}: expected key = value", path.display(), i + 1))
            })?;
            self.set(keys, k, v)
                .map_err(|e| ConfigError(format!("{}:{}: {e}", path.display(), i + 1)))?;
        }
        Ok(())
    }

    /// Apply command-line `key=value` overrides.
    pub fn apply_overrides(&mut self, keys: &[Key], overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (k, v) = split_pair(o)
                .ok_or_else(|| ConfigError(format!("expected key=value, got {o:?}")))?;
            self.set(keys, k, v)?;
        }
        Ok(())
    }

    pub fn str(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("key {key} is not registered for this command"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.str(key);
        raw.parse()
            .map_err(|e| ConfigError(format!("bad value {raw:?} for {key}: {e}")))
    }

    /// Comma-separated list; empty text gives an empty list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let raw = self.str(key);
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|e| ConfigError(format!("bad value {s:?} for {key}: {e}")))
            })
            .collect()
    }

    /// Every key with its resolved text, sorted by key, for provenance.
    pub fn pairs(&self) -> Vec<(String, String)> {
        self.values.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }
}

/// The key table shown under `--help`.
pub fn help_table(keys: &[Key]) -> String {
    let width = keys.iter().map(|k| k.name.len()).max().unwrap_or(0);
    let mut out = String::from("Config keys (set with key=value or in --config FILE):\n");
    for k in keys {
        let default = if k.default.is_empty() { "\"\"" } else { &k.default };
        out.push_str(&format!("  {:width$}  {}  [default: {default}]\n", k.name, k.help));
    }
    out
}
