//! Flat `key = value` text with optional `[section]` headers.
//!
//! Used for run configurations and calibration files. Blank lines and lines
//! starting with `#` or `;` are ignored. Keys are case-sensitive and must be
//! unique across the whole document regardless of section, so that every key
//! can also be addressed as a bare `--key` flag.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Parsed document, preserving the first-seen order of keys.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: Vec<Entry>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = KeyValues::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| {
                    Error::InvalidInput(format!("line {line_no}: unterminated section header"))
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("line {line_no}: expected 'key = value'"))
            })?;
            let key = k.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::InvalidInput(format!(
                    "line {line_no}: bad key '{key}'"
                )));
            }
            if let Some(prev) = out.entries.iter().find(|e| e.key == key) {
                return Err(Error::InvalidInput(format!(
                    "line {line_no}: duplicate key '{key}' (first defined on line {})",
                    prev.line
                )));
            }
            out.entries.push(Entry {
                section: section.clone(),
                key: key.to_string(),
                value: v.trim().to_string(),
                line: line_no,
            });
        }
        Ok(out)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.key == key)
            .map(|e| e.value.as_str())
    }

    /// Insert or overwrite. New keys go into `section`.
    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value,
            None => self.entries.push(Entry {
                section: section.to_string(),
                key: key.to_string(),
                value,
                line: 0,
            }),
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::InvalidInput(format!("key '{key}': cannot parse '{v}': {e}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse_value(key)?
            .ok_or_else(|| Error::InvalidInput(format!("missing key '{key}'")))
    }

    /// Comma-separated list of reals.
    pub fn float_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|e| {
                        Error::InvalidInput(format!("key '{key}': bad number '{s}': {e}"))
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    /// Section name to `(key, value)` pairs, sorted by section then key.
    pub fn to_sorted_map(&self) -> BTreeMap<String, BTreeMap<String, String>> {
        let mut map: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for e in &self.entries {
            map.entry(e.section.clone())
                .or_default()
                .insert(e.key.clone(), e.value.clone());
        }
        map
    }

    /// Render grouped by section in first-seen order.
    pub fn render(&self) -> String {
        let mut sections: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !sections.contains(&e.section.as_str()) {
                sections.push(&e.section);
            }
        }
        let mut out = String::new();
        for (i, s) in sections.iter().enumerate() {
            if !s.is_empty() {
                if i > 0 {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{s}]");
            }
            for e in self.entries.iter().filter(|e| e.section == *s) {
                let _ = writeln!(out, "{} = {}", e.key, e.value);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let kv = KeyValues::parse("# top\nseed = 7\n\n[grid]\nn_points = 64 \n; note\nL=64.0\n")
            .unwrap();
        assert_eq!(kv.get("seed"), Some("7"));
        assert_eq!(kv.require::<usize>("n_points").unwrap(), 64);
        assert_eq!(kv.entries()[2].section, "grid");
        assert_eq!(kv.require::<f64>("L").unwrap(), 64.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = KeyValues::parse("a = 1\nnonsense\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = KeyValues::parse("a = 1\n[s]\na = 2\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("duplicate"), "{e}");
        assert!(KeyValues::parse("[open\n").is_err());
        let kv = KeyValues::parse("x = abc").unwrap();
        assert!(kv.require::<f64>("x").is_err());
        assert!(kv.require::<f64>("y").is_err());
    }

    #[test]
    fn round_trip_and_override() {
        let mut kv = KeyValues::parse("[a]\nx = 1\n[b]\ny = 0.1, 0.2\n").unwrap();
        kv.set("a", "x", "5");
        kv.set("c", "z", "true");
        assert_eq!(kv.float_list("y").unwrap().unwrap(), vec![0.1, 0.2]);
        let again = KeyValues::parse(&kv.render()).unwrap();
        assert_eq!(again.get("x"), Some("5"));
        assert_eq!(again.get("z"), Some("true"));
        assert_eq!(again.to_sorted_map(), kv.to_sorted_map());
    }
}
