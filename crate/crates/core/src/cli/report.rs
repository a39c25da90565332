//! Report serialization.
//!
//! Rationals are written as `"p/q"` strings and integers as decimal strings,
//! so nothing is rounded on the way to disk. JSON goes through
//! `serde_json::Value`, whose maps are ordered, so keys come out sorted and
//! output is byte-identical for identical inputs.

use std::fs;
use std::io::Write;
use std::path::Path;

use rug::{Integer, Rational};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::Result;

pub fn rational_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn rational_as_string<S: Serializer>(
    q: &Rational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(q))
}

pub fn rationals_as_strings<S: Serializer>(
    v: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for q in v {
        seq.serialize_element(&rational_string(q))?;
    }
    seq.end()
}

pub fn integer_as_string<S: Serializer>(i: &Integer, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&i.to_string())
}

pub fn integers_as_strings<S: Serializer>(
    v: &[Integer],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for i in v {
        seq.serialize_element(&i.to_string())?;
    }
    seq.end()
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Writes `contents` to `path` through a sibling temporary file and a rename,
/// so readers never observe a half-written report.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let file_name = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{file_name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Minimal CSV writer for flat projections; fields containing commas or
/// quotes are quoted.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    fn field(s: &str) -> String {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    }
    let mut out = header
        .iter()
        .map(|h| field(h))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|f| field(f)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}
