//! Content-addressed JSON cache: one file per key at `<dir>/<h[0..2]>/<h>.json`
//! with h = sha256 of the key parts. Writes go through a temp file in the
//! same directory and an atomic rename, so readers never see partial files.

use serde_json::Value;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

pub struct Cache {
    dir: PathBuf,
    warnings: Mutex<Vec<String>>,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into(), warnings: Mutex::new(vec![]) }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(parts: &[&str]) -> String {
        let mut h = Sha256::new();
        for p in parts {
            h.update((p.len() as u64).to_le_bytes());
            h.update(p.as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{}.json", key))
    }

    fn warn(&self, msg: String) {
        eprintln!("warning: {}", msg);
        self.warnings.lock().expect("poisoned").push(msg);
    }

    pub fn warnings(&self) -> Vec<String> {
        self.warnings.lock().expect("poisoned").clone()
    }

    /// None on a miss; a corrupt entry is reported and treated as a miss.
    pub fn get(&self, key: &str) -> Option<Value> {
        let path = self.path(key);
        let bytes = std::fs::read(&path).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(v) => Some(v),
            Err(e) => {
                self.warn(format!("corrupt cache entry {} ({}); recomputing", path.display(), e));
                None
            }
        }
    }

    pub fn put(&self, key: &str, value: &Value) -> std::io::Result<()> {
        let path = self.path(key);
        let parent = path.parent().expect("two-level layout");
        std::fs::create_dir_all(parent)?;
        let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
        tmp.write_all(serde_json::to_string(value).expect("serializable").as_bytes())?;
        tmp.flush()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn get_or_compute<E, F>(&self, parts: &[&str], f: F) -> Result<Value, E>
    where
        F: FnOnce() -> Result<Value, E>,
    {
        let key = Self::key(parts);
        if let Some(v) = self.get(&key) {
            return Ok(v);
        }
        let v = f()?;
        if let Err(e) = self.put(&key, &v) {
            self.warn(format!("cache write failed: {}", e));
        }
        Ok(v)
    }
}

/// Optional cache: computes directly when absent.
pub fn cached<E, F>(cache: Option<&Cache>, parts: &[&str], f: F) -> Result<Value, E>
where
    F: FnOnce() -> Result<Value, E>,
{
    match cache {
        Some(c) => c.get_or_compute(parts, f),
        None => f(),
    }
}
