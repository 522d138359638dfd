//! `key = value` configuration files.
//!
//! Keys are the long flag names without the leading dashes; `_` and `-` are
//! interchangeable. Blank lines and lines starting with `#` are skipped.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-").to_ascii_lowercase()
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|m| CliError::format(path, m))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
            values.insert(normalize(k), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize(key)).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// `flag` when given, otherwise the parsed config value, otherwise `None`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Validation(format!("config key {key} = {raw:?}: {e}"))),
        }
    }

    /// Comma separated list, with the same precedence as [`ConfigFile::pick`].
    pub fn pick_list<T>(&self, flag: Vec<T>, key: &str) -> CliResult<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if !flag.is_empty() {
            return Ok(flag);
        }
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(raw) => raw
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<T>()
                        .map_err(|e| CliError::Validation(format!("config key {key}: {s:?}: {e}")))
                })
                .collect(),
        }
    }
}

/// Ordered `key = value` lines describing a fully resolved run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResolvedConfig {
    pub command: String,
    pub entries: Vec<(String, String)>,
}

impl ResolvedConfig {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    /// Text readable again with `--config`.
    pub fn render(&self) -> String {
        let mut s = format!("# ndrt {}\n", self.command);
        for (k, v) in &self.entries {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_pick() {
        let c = ConfigFile::parse("# comment\nmax_iters = 40\n\nalgo=ndrtp\nalgos = rht, nnsp\n").unwrap();
        assert_eq!(c.get("max-iters"), Some("40"));
        assert_eq!(c.pick::<usize>(None, "max-iters").unwrap(), Some(40));
        assert_eq!(c.pick::<usize>(Some(3), "max-iters").unwrap(), Some(3));
        assert_eq!(c.pick::<usize>(None, "k").unwrap(), None);
        assert!(c.pick::<usize>(None, "algo").is_err());
        let l: Vec<String> = c.pick_list(Vec::new(), "algos").unwrap();
        assert_eq!(l, vec!["rht", "nnsp"]);
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(ConfigFile::parse("k 5").is_err());
    }

    #[test]
    fn render_round_trips() {
        let mut r = ResolvedConfig::new("recover");
        r.set("k", 5).set("algo", "NDRT");
        let c = ConfigFile::parse(&r.render()).unwrap();
        assert_eq!(c.get("k"), Some("5"));
        assert_eq!(c.get("algo"), Some("NDRT"));
    }
}
