use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::Failure;

/// 17 significant digits, enough to round-trip every double.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes to a temporary file next to `path` and renames it into place, so a
/// failed run never leaves a partial file behind.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let fail = |e: std::io::Error| Failure {
        code: 4,
        message: format!("{}: {e}", path.display()),
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.flush().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
