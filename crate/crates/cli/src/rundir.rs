//! Output directories that appear only once complete.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Files are written under `<root>/.<name>.partial` and the directory is
/// renamed to `<root>/<name>` by [`RunDir::commit`]. Dropping an uncommitted
/// run removes the partial directory.
pub struct RunDir {
    partial: PathBuf,
    target: PathBuf,
    committed: bool,
}

impl RunDir {
    /// `<subcommand>-<UTC timestamp>-s<seed>`, with a numeric suffix when the
    /// name is taken.
    pub fn create(root: &Path, subcommand: &str, seed: u64) -> io::Result<RunDir> {
        fs::create_dir_all(root)?;
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
        let base = format!("{subcommand}-{stamp}-s{seed}");
        let mut name = base.clone();
        let mut i = 1;
        loop {
            let partial = root.join(format!(".{name}.partial"));
            let target = root.join(&name);
            if !target.exists() {
                match fs::create_dir(&partial) {
                    Ok(()) => {
                        return Ok(RunDir {
                            partial,
                            target,
                            committed: false,
                        })
                    }
                    Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {}
                    Err(e) => return Err(e),
                }
            }
            i += 1;
            name = format!("{base}-{i}");
        }
    }

    pub fn write(&self, file: &str, contents: impl AsRef<[u8]>) -> io::Result<()> {
        fs::write(self.partial.join(file), contents)
    }

    pub fn write_json<T: Serialize>(&self, file: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write(file, text)
    }

    pub fn commit(mut self) -> io::Result<PathBuf> {
        fs::rename(&self.partial, &self.target)?;
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.partial);
        }
    }
}

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}
