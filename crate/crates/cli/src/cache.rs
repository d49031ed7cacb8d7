//! Plain-text cache of fundamental units and class numbers.
//!
//! ```text
//! # geodesic-cache v1
//! 5,3,1,1
//! 8,6,2,1
//! ```
//!
//! One `d,u,v,h` line per discriminant, sorted by `d`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use geodesic_core::forms::{is_discriminant, Discriminant};
use geodesic_core::spectrum::ClassRecord;

pub const HEADER: &str = "# geodesic-cache v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheEntry {
    pub d: u64,
    pub u: u64,
    pub v: u64,
    pub h: u64,
}

impl CacheEntry {
    pub fn from_record(r: &ClassRecord) -> Self {
        CacheEntry {
            d: r.d.get(),
            u: r.u,
            v: r.v,
            h: r.h,
        }
    }

    pub fn to_record(self) -> ClassRecord {
        let n = self.u as f64;
        ClassRecord {
            d: Discriminant::new(self.d as i128).expect("validated on parse"),
            u: self.u,
            v: self.v,
            h: self.h,
            regulator: ((n + (n * n - 4.0).sqrt()) / 2.0).ln(),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !is_discriminant(self.d as i128) {
            return Err(format!("{} is not a discriminant", self.d));
        }
        if self.u < 3 || self.v == 0 || self.h == 0 {
            return Err("u must exceed 2 and v, h must be positive".into());
        }
        let lhs = (self.u as u128).checked_mul(self.u as u128);
        let rhs = (self.v as u128)
            .checked_mul(self.v as u128)
            .and_then(|s| s.checked_mul(self.d as u128))
            .and_then(|s| s.checked_add(4));
        if lhs.is_none() || lhs != rhs {
            return Err(format!(
                "u² - d v² != 4 for ({}, {}, {})",
                self.d, self.u, self.v
            ));
        }
        Ok(())
    }
}

pub fn parse(text: &str) -> Result<BTreeMap<u64, CacheEntry>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == HEADER => {}
        _ => bail!("line 1: expected header {HEADER:?}"),
    }
    let mut entries = BTreeMap::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            bail!("line {line_no}: expected 4 fields, found {}", fields.len());
        }
        let mut values = [0u64; 4];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field
                .trim()
                .parse()
                .with_context(|| format!("line {line_no}: bad integer {field:?}"))?;
        }
        let [d, u, v, h] = values;
        let entry = CacheEntry { d, u, v, h };
        if let Err(msg) = entry.validate() {
            bail!("line {line_no}: {msg}");
        }
        if entries.insert(d, entry).is_some() {
            bail!("line {line_no}: duplicate discriminant {d}");
        }
    }
    Ok(entries)
}

pub fn render(entries: &BTreeMap<u64, CacheEntry>) -> String {
    let mut out = String::with_capacity(entries.len() * 32 + HEADER.len() + 1);
    out.push_str(HEADER);
    out.push('\n');
    for e in entries.values() {
        out.push_str(&format!("{},{},{},{}\n", e.d, e.u, e.v, e.h));
    }
    out
}

/// Reads the cache, treating a missing file as empty.
pub fn load(path: &Path) -> Result<BTreeMap<u64, CacheEntry>> {
    match fs::read_to_string(path) {
        Ok(text) => parse(&text).with_context(|| format!("corrupt cache {}", path.display())),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(BTreeMap::new()),
        Err(e) => Err(e).with_context(|| format!("reading cache {}", path.display())),
    }
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn store(path: &Path, entries: &BTreeMap<u64, CacheEntry>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(render(entries).as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing cache {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BTreeMap<u64, CacheEntry> {
        [(5, 3, 1, 1), (8, 6, 2, 1), (12, 4, 1, 2), (21, 5, 1, 2)]
            .into_iter()
            .map(|(d, u, v, h)| (d, CacheEntry { d, u, v, h }))
            .collect()
    }

    #[test]
    fn round_trip() {
        let entries = sample();
        let text = render(&entries);
        assert!(text.starts_with("# geodesic-cache v1\n5,3,1,1\n"));
        assert_eq!(parse(&text).unwrap(), entries);
    }

    #[test]
    fn store_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.txt");
        assert!(load(&path).unwrap().is_empty());
        store(&path, &sample()).unwrap();
        assert_eq!(load(&path).unwrap(), sample());
    }

    #[test]
    fn corrupt_lines_report_line_numbers() {
        let cases = [
            ("5,3,1,1\n", "line 1"),
            ("# geodesic-cache v1\n5,3,1,1\n8,6,2\n", "line 3"),
            ("# geodesic-cache v1\n5,3,1,x\n", "line 2"),
            ("# geodesic-cache v1\n5,3,1,1\n13,4,1,1\n", "line 3"),
            ("# geodesic-cache v1\n5,3,1,0\n", "line 2"),
            ("# geodesic-cache v1\n5,3,1,1\n5,3,1,1\n", "line 3"),
        ];
        for (text, expect) in cases {
            let err = format!("{:#}", parse(text).unwrap_err());
            assert!(err.starts_with(expect), "{err}");
        }
    }

    #[test]
    fn record_conversion() {
        let e = CacheEntry {
            d: 5,
            u: 3,
            v: 1,
            h: 1,
        };
        let r = e.to_record();
        assert!((r.regulator - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-15);
        assert_eq!(CacheEntry::from_record(&r), e);
    }
}
