//! JSONL readers and writers for the three bulk file formats.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
pub struct FileHeader {
    pub format_version: u32,
    pub kind: String,
}

/// Reads records, skipping blank lines and a leading header record (any
/// object with `format_version` and no `problem_id`). Errors name the line.
pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("{}:{}: read failed", path.display(), i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: malformed JSON", path.display(), i + 1))?;
        if out.is_empty() && is_header(&value) {
            let version = value["format_version"].as_u64().unwrap_or(0);
            if version != u64::from(FORMAT_VERSION) {
                bail!(
                    "{}:{}: unsupported format_version {version}",
                    path.display(),
                    i + 1
                );
            }
            continue;
        }
        out.push(
            serde_json::from_value(value)
                .with_context(|| format!("{}:{}: bad record", path.display(), i + 1))?,
        );
    }
    Ok(out)
}

fn is_header(v: &Value) -> bool {
    v.get("format_version").is_some() && v.get("problem_id").is_none() && v.get("id").is_none()
}

/// Writes through a temporary sibling and renames it into place, so a
/// rerun replaces earlier output instead of appending to it.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().context("output path has no file name")?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let file =
            File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
        let mut w = BufWriter::new(file);
        write(&mut w)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_line<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}
