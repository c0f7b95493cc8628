//! Output plumbing. Documents are rendered in full first, then written to
//! temporary files next to their targets and renamed, so a failed run never
//! leaves a partial file behind.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A rendered document and where it goes (`None` is stdout).
pub struct Document {
    pub path: Option<PathBuf>,
    pub text: String,
}

pub fn json<T: Serialize>(path: Option<PathBuf>, value: &T) -> Result<Document, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    text.push('\n');
    Ok(Document { path, text })
}

/// 17 significant digits, `.` separator; `-0` prints as `0`.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn csv(path: PathBuf, header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Document {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    Document { path: Some(path), text }
}

fn stage(path: &Path, text: &str) -> Result<NamedTempFile, CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    Ok(tmp)
}

pub fn emit(docs: Vec<Document>) -> Result<(), CliError> {
    let mut staged = Vec::new();
    for doc in &docs {
        if let Some(path) = &doc.path {
            staged.push((stage(path, &doc.text)?, path));
        }
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    }
    let mut stdout = std::io::stdout().lock();
    for doc in docs.iter().filter(|d| d.path.is_none()) {
        stdout
            .write_all(doc.text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
    }
    Ok(())
}
