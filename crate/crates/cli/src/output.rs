use std::io::Write;
use std::path::Path;

use crate::fail::{CliError, INPUT};

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::new(INPUT, format!("cannot write {}: {e}", path.display()))
}

/// Writes `contents` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file. `None` means stdout.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(contents.as_bytes())
            .and_then(|_| if contents.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") })
            .map_err(|e| CliError::new(INPUT, format!("cannot write to stdout: {e}")))?;
        return Ok(());
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(path)).map_err(|e| io_error(path, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

/// Same as [`emit`] for producers that insist on writing a path themselves.
pub fn emit_with(
    path: &Path,
    write: impl FnOnce(&Path) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let tmp = tempfile::NamedTempFile::new_in(parent_dir(path))
        .map_err(|e| io_error(path, e))?
        .into_temp_path();
    write(&tmp)?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}
