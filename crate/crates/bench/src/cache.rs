//! Content-addressed matrix cache and the per-output-directory batch lock.

use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult, ErrorKind};
use crate::formats::{decode_matrix, encode_matrix, MatrixFile};
use crate::report::write_bytes;

pub const CACHE_ENV: &str = "MESH3D_CACHE_DIR";
const LOCK_NAME: &str = ".mesh3d-bench.lock";

/// Cache directory: `$MESH3D_CACHE_DIR`, else `<out>/cache`.
pub fn cache_dir(out: &Path) -> PathBuf {
    match std::env::var_os(CACHE_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => out.join("cache"),
    }
}

/// Builds a cache key from labelled parts.
#[derive(Default)]
pub struct KeyBuilder(Sha256);

impl KeyBuilder {
    pub fn part(mut self, label: &str, bytes: &[u8]) -> Self {
        self.0.update((label.len() as u64).to_le_bytes());
        self.0.update(label.as_bytes());
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
        self
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

pub struct MatrixCache {
    dir: PathBuf,
}

impl MatrixCache {
    pub fn new(dir: PathBuf) -> Self {
        MatrixCache { dir }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.cdmx"))
    }

    /// A corrupt or unreadable entry counts as a miss.
    pub fn get(&self, key: &str) -> Option<MatrixFile> {
        let bytes = std::fs::read(self.path(key)).ok()?;
        decode_matrix(&bytes).ok()
    }

    /// Written to a temporary name first so readers never see partial files.
    pub fn put(&self, key: &str, m: &MatrixFile) -> CliResult<()> {
        let tmp = self.dir.join(format!("{key}.cdmx.tmp{}", std::process::id()));
        write_bytes(&tmp, &encode_matrix(m))?;
        let dst = self.path(key);
        std::fs::rename(&tmp, &dst).map_err(|e| CliError::io(&dst, e))
    }
}

/// Exclusive claim on an output directory, released on drop.
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(out: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let path = out.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(OutputLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::new(
                ErrorKind::Locked,
                format!("{} is in use by another batch (remove {} if stale)", out.display(), path.display()),
            )),
            Err(e) => Err(CliError::io(&path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}
