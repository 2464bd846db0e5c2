//! Content-addressed on-disk cache of result sets.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::PipelineError;

use super::results::ResultSet;
use super::{InputSpec, RunConfig};

/// SHA-256 over the geometry bytes, value bytes, and configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(String);

impl CacheKey {
    pub fn compute(geometry: &[u8], values: &[u8], config: &RunConfig, input: &InputSpec) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"clusterlens-cache-v1");
        for part in [geometry, values] {
            hasher.update((part.len() as u64).to_le_bytes());
            hasher.update(part);
        }
        let settings = serde_json::to_vec(&(config, input)).expect("config serializes");
        hasher.update((settings.len() as u64).to_le_bytes());
        hasher.update(&settings);
        CacheKey(hex::encode(hasher.finalize()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn file_in(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.json", self.0))
    }
}

impl fmt::Display for CacheKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Returns the cached result set for `key`, if any.
///
/// An unreadable, unparsable, or mismatching file counts as a miss and is renamed to
/// `<key>.json.corrupt`.
pub fn cache_lookup(key: &CacheKey, cache_dir: &Path) -> Option<ResultSet> {
    let path = key.file_in(cache_dir);
    let bytes = match fs::read(&path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
        Err(e) => {
            log::warn!("cache file {} unreadable: {e}", path.display());
            return None;
        }
    };
    let problem = match ResultSet::from_json(&bytes) {
        Ok(rs) if rs.dataset.digest == key.as_str() => return Some(rs),
        Ok(rs) => format!("digest mismatch ({})", rs.dataset.digest),
        Err(e) => e.to_string(),
    };
    let quarantine = path.with_extension("json.corrupt");
    log::warn!(
        "corrupt cache file {} ({problem}); moved to {}",
        path.display(),
        quarantine.display()
    );
    if let Err(e) = fs::rename(&path, &quarantine) {
        log::warn!("could not quarantine {}: {e}", path.display());
    }
    None
}

/// Stores `rs` under `key`, creating the directory if needed. The write is atomic.
pub fn cache_store(key: &CacheKey, rs: &ResultSet, cache_dir: &Path) -> Result<PathBuf, PipelineError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| PipelineError::Io { path, source }
    };
    fs::create_dir_all(cache_dir).map_err(io(cache_dir))?;
    let path = key.file_in(cache_dir);
    let staging = cache_dir.join(format!("{}.json.tmp-{}", key.as_str(), std::process::id()));
    fs::write(&staging, rs.to_canonical_json()).map_err(io(&staging))?;
    fs::rename(&staging, &path).map_err(io(&path))?;
    Ok(path)
}
