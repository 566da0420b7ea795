//! Sequence and exponent file formats.
//!
//! Sequences: JSON `{"offset": int, "values": [float, ...]}`, or plain text
//! with one `index value` pair per line (duplicates summed, `#` comments and
//! blank lines ignored). Exponents: JSON
//! `{"window_lo": int, "values": [float, ...], "p_inf": float}`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::lattice::Sequence;

/// Widest window accepted from the text format.
pub const MAX_TEXT_SPAN: i64 = 1 << 20;

/// Strict JSON decoding whose errors name the path of the offending field.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            Error::Parse(format!("{what}: {}", e.inner()))
        } else {
            Error::Parse(format!("{what}: field `{path}`: {}", e.inner()))
        }
    })?;
    de.end().map_err(|e| Error::Parse(format!("{what}: {e}")))?;
    Ok(value)
}

pub fn parse_sequence(text: &str) -> Result<Sequence> {
    if text.trim_start().starts_with('{') {
        return parse_json(text, "sequence");
    }
    let mut entries: BTreeMap<i64, f64> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(i), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse(format!("line {}: expected `index value`", lineno + 1)));
        };
        let index: i64 = i
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad index `{i}`", lineno + 1)))?;
        let value: f64 = v
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad value `{v}`", lineno + 1)))?;
        *entries.entry(index).or_insert(0.0) += value;
    }
    let (Some((&lo, _)), Some((&hi, _))) = (entries.first_key_value(), entries.last_key_value()) else {
        return Ok(Sequence::zero());
    };
    if hi.checked_sub(lo).is_none_or(|span| span >= MAX_TEXT_SPAN) {
        return Err(Error::Parse(format!("index span [{lo},{hi}] too wide")));
    }
    let mut values = vec![0.0; (hi - lo + 1) as usize];
    for (i, v) in entries {
        values[(i - lo) as usize] = v;
    }
    Sequence::new(lo, values)
}

pub fn parse_exponent(text: &str) -> Result<ExponentFunction> {
    parse_json::<ExponentFunction>(text, "exponent")?.validated()
}

pub fn read_sequence(path: &Path) -> Result<Sequence> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_sequence(&text)
}

pub fn read_exponent(path: &Path) -> Result<ExponentFunction> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_exponent(&text)
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}
