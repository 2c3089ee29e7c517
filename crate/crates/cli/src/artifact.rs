//! Artifact files: every file starts with the format magic and a content
//! hash line, optionally followed by an input-hash line used for cache
//! invalidation. Bodies are the line formats from `subfield_dlog::fileio`.

use std::fs;
use std::path::Path;

pub const MAGIC: &str = "# subfield-dlog v1";

/// FNV-1a over the body; cheap, stable, and good enough to detect edits.
pub fn content_hash(body: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in body.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn write_artifact(path: &Path, body: &str, input_hash: Option<u64>) -> std::io::Result<()> {
    let mut s = String::new();
    s.push_str(MAGIC);
    s.push('\n');
    s.push_str(&format!("# hash: {:016x}\n", content_hash(body)));
    if let Some(ih) = input_hash {
        s.push_str(&format!("# input: {:016x}\n", ih));
    }
    s.push_str(body);
    fs::write(path, s)
}

pub struct Artifact {
    pub body: String,
    pub input_hash: Option<u64>,
}

/// Reads and checks an artifact; `None` when the file is missing or stale
/// (bad magic or hash mismatch).
pub fn read_artifact(path: &Path) -> Option<Artifact> {
    let raw = fs::read_to_string(path).ok()?;
    let mut lines = raw.lines();
    if lines.next()? != MAGIC {
        return None;
    }
    let hash_line = lines.next()?;
    let expect = u64::from_str_radix(hash_line.strip_prefix("# hash: ")?, 16).ok()?;
    let mut rest: Vec<&str> = lines.collect();
    let mut input_hash = None;
    if let Some(first) = rest.first() {
        if let Some(ih) = first.strip_prefix("# input: ") {
            input_hash = u64::from_str_radix(ih, 16).ok();
            rest.remove(0);
        }
    }
    let mut body = rest.join("\n");
    if !body.is_empty() {
        body.push('\n');
    }
    if content_hash(&body) != expect {
        return None;
    }
    Some(Artifact { body, input_hash })
}

/// Cached artifact valid for the given input hash, if any.
pub fn read_cached(path: &Path, input_hash: u64) -> Option<String> {
    let art = read_artifact(path)?;
    if art.input_hash == Some(input_hash) {
        Some(art.body)
    } else {
        None
    }
}

/// Per-stage seed derived from the global seed and the stage name, so every
/// stage draws from its own named pseudo-random stream.
pub fn stage_seed(global: u64, stage: &str) -> u64 {
    content_hash(&format!("{}:{}", global, stage))
}
