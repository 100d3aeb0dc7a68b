//! Output plumbing: pinned float formatting, atomic file writes, and a
//! minimal JSON emitter that keeps numbers in the pinned format.
//!
//! All floats leave the program as `{:.16e}` (17 significant digits), so a
//! rerun with identical flags produces byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// 17-significant-digit scientific form; the single float format for every
/// CSV and JSON artifact.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write via a sibling temp file and rename, so readers never observe a
/// partially written artifact.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating output directory {}", dir.display()))?;
        }
    }
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} into place", tmp.display()))?;
    Ok(())
}

pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

pub fn json_f64_array(values: &[f64]) -> String {
    let body: Vec<String> = values.iter().map(|&v| g17(v)).collect();
    format!("[{}]", body.join(", "))
}

/// One CSV line from preformatted cells.
pub fn csv_line(cells: &[String]) -> String {
    cells.join(",")
}
