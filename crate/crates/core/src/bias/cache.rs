//! Content-addressed cache of enumerated hypothesis spaces, in memory and
//! optionally on disk as `<hash>.space` files.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use super::mode::ModeDecl;
use super::space::{enumerate_space, BiasConfig, HypothesisSpace};
use super::BiasError;

/// Hash of the declaration set (order-insensitive) and the configuration.
pub fn space_key(decls: &[ModeDecl], config: &BiasConfig) -> String {
    let mut lines: Vec<String> = decls.iter().map(ToString::to_string).collect();
    lines.sort();
    lines.dedup();
    let mut h = Sha256::new();
    for l in &lines {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    h.update(config.fingerprint().as_bytes());
    hex::encode(&h.finalize()[..16])
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpaceCacheStats {
    pub hits: usize,
    pub misses: usize,
    /// Times the space was actually enumerated.
    pub enumerations: usize,
}

impl SpaceCacheStats {
    pub fn hit_rate(&self) -> f64 {
        let total = self.hits + self.misses;
        if total == 0 {
            0.0
        } else {
            self.hits as f64 / total as f64
        }
    }
}

#[derive(Debug, Default)]
pub struct SpaceCache {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<String, Result<Arc<HypothesisSpace>, BiasError>>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    enumerations: AtomicUsize,
}

impl SpaceCache {
    pub fn in_memory() -> SpaceCache {
        SpaceCache::default()
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> SpaceCache {
        SpaceCache { dir: Some(dir.into()), ..SpaceCache::default() }
    }

    pub fn stats(&self) -> SpaceCacheStats {
        SpaceCacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            enumerations: self.enumerations.load(Ordering::Relaxed),
        }
    }

    /// The space for these inputs, enumerating only when neither memory nor
    /// disk has it. A disk file that fails to read back is rebuilt. Failed
    /// enumerations are remembered in memory and count as hits.
    pub fn get_or_build(&self, decls: &[ModeDecl], config: &BiasConfig) -> Result<Arc<HypothesisSpace>, BiasError> {
        let key = space_key(decls, config);
        // one writer at a time: the lock is held across enumeration
        let mut memory = self.memory.lock().expect("space cache lock");
        if let Some(s) = memory.get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return s.clone();
        }
        let path = self.dir.as_ref().map(|d| d.join(format!("{key}.space")));
        if let Some(p) = &path {
            if let Ok(text) = std::fs::read_to_string(p) {
                match HypothesisSpace::from_text(&text, &key) {
                    Ok(space) => {
                        self.hits.fetch_add(1, Ordering::Relaxed);
                        let space = Arc::new(space);
                        memory.insert(key, Ok(Arc::clone(&space)));
                        return Ok(space);
                    }
                    Err(e) => log::warn!("rebuilding {}: {e}", p.display()),
                }
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        self.enumerations.fetch_add(1, Ordering::Relaxed);
        let space = match enumerate_space(decls, config) {
            Ok(s) => Arc::new(s),
            Err(e) => {
                memory.insert(key, Err(e.clone()));
                return Err(e);
            }
        };
        if let Some(p) = &path {
            let io = |e: std::io::Error| BiasError::Io(format!("{}: {e}", p.display()));
            if let Some(parent) = p.parent() {
                std::fs::create_dir_all(parent).map_err(io)?;
            }
            let tmp = p.with_extension("space.tmp");
            std::fs::write(&tmp, space.to_text(&key)).map_err(io)?;
            std::fs::rename(&tmp, p).map_err(io)?;
        }
        memory.insert(key, Ok(Arc::clone(&space)));
        Ok(space)
    }
}
