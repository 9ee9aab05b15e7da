//! Content-addressed result cache. Entries are the exact JSON documents the
//! commands print, keyed by a hash of everything that affects them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const CACHE_DIR_VAR: &str = "RADOCOLOR_CACHE_DIR";

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// The cache named by the environment, if any.
    pub fn from_env() -> Option<Cache> {
        std::env::var_os(CACHE_DIR_VAR)
            .filter(|v| !v.is_empty())
            .map(|dir| Cache {
                dir: PathBuf::from(dir),
            })
    }

    pub fn key<T: Serialize>(config: &T) -> String {
        let canonical = serde_json::to_vec(config).expect("run configs serialize");
        hex::encode(Sha256::digest(&canonical))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A stored document, if present and well-formed.
    pub fn lookup<T: serde::de::DeserializeOwned>(&self, key: &str) -> Option<(String, T)> {
        let path = self.path(key);
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str(&text) {
            Ok(doc) => {
                log::info!("cache hit {}", path.display());
                Some((text, doc))
            }
            Err(e) => {
                log::warn!("ignoring corrupt cache entry {}: {e}", path.display());
                None
            }
        }
    }

    pub fn store(&self, key: &str, text: &str) {
        if let Err(e) = write_atomic(&self.dir, &self.path(key), text) {
            log::warn!("could not write cache entry {key}: {e}");
        }
    }
}

fn write_atomic(dir: &Path, path: &Path, text: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, text)?;
    fs::rename(tmp, path)
}
