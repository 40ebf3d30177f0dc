//! Tab-separated triple files: one `subject<TAB>predicate<TAB>object` per
//! line, UTF-8, no header. Blank lines are skipped.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use kgns_core::LabeledTriple;

use crate::error::{Error, Result};

pub fn parse_triples(text: &str, origin: &Path) -> Result<Vec<LabeledTriple>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let bad = |message: String| Error::Parse { path: origin.to_path_buf(), line: i + 1, message };
        if fields.len() != 3 {
            return Err(bad(format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(bad("empty label".into()));
        }
        out.push(LabeledTriple::new(fields[0], fields[1], fields[2]));
    }
    Ok(out)
}

pub fn read_triples(path: &Path) -> Result<Vec<LabeledTriple>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_triples(&text, path)
}

pub fn format_triples(triples: &[LabeledTriple]) -> String {
    let mut s = String::with_capacity(triples.len() * 32);
    for t in triples {
        let _ = writeln!(s, "{}\t{}\t{}", t.subject, t.predicate, t.object);
    }
    s
}

pub fn write_triples(path: &Path, triples: &[LabeledTriple]) -> Result<()> {
    write_file(path, format_triples(triples).as_bytes())
}

/// Writes `bytes`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
