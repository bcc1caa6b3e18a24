use std::path::Path;

use crate::Failure;

/// Writes through a sibling temporary file so a reader never sees a
/// partial artifact.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), Failure> {
    let fail = |e: std::io::Error| Failure::Data(format!("cannot write {}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(fail)?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    std::fs::write(&tmp, content).map_err(fail)?;
    std::fs::rename(&tmp, path).map_err(fail)
}
