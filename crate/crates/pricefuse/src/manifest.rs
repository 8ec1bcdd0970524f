//! Flat `key=value` text used for manifests and config files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys keep their
//! insertion order when written, so output is byte-stable.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut kv = KeyValues::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::parse(origin, format!("line {}: expected key=value", n + 1))
            })?;
            kv.set(k.trim(), v.trim());
        }
        Ok(kv)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&io::read_text(path)?, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        io::write_bytes(path, self.to_string().as_bytes())
    }

    /// Replaces an existing key in place or appends a new one.
    pub fn set(&mut self, key: &str, value: impl Display) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|e| Error::Config(format!("key `{key}`: cannot parse `{raw}`: {e}")))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn extend(&mut self, other: &KeyValues) {
        for (k, v) in &other.entries {
            self.set(k, v);
        }
    }
}

impl std::fmt::Display for KeyValues {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Comma-joins any displayable values.
pub fn join<T: Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses a comma list written by [`join`]. An empty string is an empty list.
pub fn split<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>>
where
    T::Err: Display,
{
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e| Error::Config(format!("key `{key}`: cannot parse `{s}`: {e}")))
        })
        .collect()
}
