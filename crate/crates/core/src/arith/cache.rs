//! Line-oriented Kloosterman value cache.
//!
//! ```text
//! KLOOSTERMAN-CACHE v1
//! c a b value
//! ```
//!
//! Values carry 17 significant digits, enough to round-trip an `f64`.
//! Readers accept lines in any order; keys are normalized on load.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::kloosterman::{kloosterman_value, KloostermanKey};
use crate::{Error, Result};

pub const CACHE_HEADER: &str = "KLOOSTERMAN-CACHE v1";
const MAGIC: &str = "KLOOSTERMAN-CACHE";

/// File name used inside a cache directory.
pub const CACHE_FILE_NAME: &str = "kloosterman-v1.txt";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KloostermanCache {
    entries: BTreeMap<KloostermanKey, f64>,
}

/// Formats a float with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl KloostermanCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &KloostermanKey) -> Option<f64> {
        self.entries.get(key).copied()
    }

    pub fn insert(&mut self, key: KloostermanKey, value: f64) {
        self.entries.insert(key, value);
    }

    /// Cached value, computing and storing it on a miss.
    pub fn get_or_compute(&mut self, key: KloostermanKey) -> f64 {
        *self.entries.entry(key).or_insert_with(|| kloosterman_value(key).value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&KloostermanKey, &f64)> {
        self.entries.iter()
    }

    pub fn read_from<R: Read>(reader: R) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = loop {
            match lines.next() {
                None => return Err(Error::Cache("missing header".into())),
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
            }
        };
        let header = header.trim();
        if header != CACHE_HEADER {
            return Err(match header.strip_prefix(MAGIC) {
                Some(version) => Error::UnknownCacheVersion(version.trim().to_string()),
                None => Error::Cache(format!("bad header {header:?}")),
            });
        }
        let mut cache = Self::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Cache(format!("line {}: {line:?}", lineno + 2));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [c, a, b, value] = fields[..] else {
                return Err(bad());
            };
            let c: u64 = c.parse().map_err(|_| bad())?;
            let a: i64 = a.parse().map_err(|_| bad())?;
            let b: i64 = b.parse().map_err(|_| bad())?;
            let value: f64 = value.parse().map_err(|_| bad())?;
            let key = KloostermanKey::new(a, b, c).map_err(|_| bad())?;
            cache.insert(key, value);
        }
        Ok(cache)
    }

    /// Writes entries sorted by `(c, a, b)`.
    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{CACHE_HEADER}")?;
        for (k, v) in &self.entries {
            writeln!(writer, "{} {} {} {}", k.c, k.a, k.b, format_f64(*v))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(fs::File::open(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }
}
