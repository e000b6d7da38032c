//! Content-addressed result cache for batch runs. One JSON file per
//! entry, keyed by the SHA-256 of the full computation input, plus a
//! persisted hit/miss counter. Access is process-exclusive via a lock
//! file so that concurrent runs cannot interleave writes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Environment variable selecting the cache directory.
pub const CACHE_ENV: &str = "CAVITYPRESS_CACHE";

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    created: u64,
    input: String,
    payload: String,
}

#[derive(Default, Serialize, Deserialize)]
struct Counters {
    hits: u64,
    misses: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheStats {
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
}

impl CacheStats {
    pub fn hit_rate(&self) -> f64 {
        let total = self.hits + self.misses;
        if total == 0 {
            0.0
        } else {
            self.hits as f64 / total as f64
        }
    }
}

struct LockGuard {
    path: PathBuf,
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub struct ResultCache {
    dir: PathBuf,
    counters: Counters,
    _lock: LockGuard,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn key_of(input: &str) -> String {
    hex::encode(Sha256::digest(input.as_bytes()))
}

impl ResultCache {
    /// Open (creating if needed) the cache at `dir`, taking the lock.
    pub fn open(dir: &Path) -> Result<ResultCache> {
        fs::create_dir_all(dir)?;
        let lock_path = dir.join("lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock_path) {
            Ok(_) => {}
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(Error::precondition(format!(
                    "cache at {} is locked by another process (stale? remove {})",
                    dir.display(),
                    lock_path.display()
                )));
            }
            Err(e) => return Err(e.into()),
        }
        let lock = LockGuard { path: lock_path };
        let counters = match fs::read_to_string(dir.join("stats.json")) {
            Ok(text) => serde_json::from_str(&text).unwrap_or_default(),
            Err(_) => Counters::default(),
        };
        Ok(ResultCache { dir: dir.to_path_buf(), counters, _lock: lock })
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn persist_counters(&self) -> Result<()> {
        let text = serde_json::to_string(&self.counters).expect("counters serialize");
        fs::write(self.dir.join("stats.json"), text)?;
        Ok(())
    }

    /// Look up the payload stored for `input`, counting a hit or miss.
    pub fn get(&mut self, input: &str) -> Result<Option<String>> {
        let key = key_of(input);
        match fs::read_to_string(self.entry_path(&key)) {
            Ok(text) => {
                let entry: Entry = serde_json::from_str(&text).map_err(|e| {
                    Error::precondition(format!("corrupt cache entry {key}: {e}"))
                })?;
                if entry.input != input {
                    return Err(Error::precondition(format!(
                        "cache entry {key} stores a different input (hash collision or corruption)"
                    )));
                }
                self.counters.hits += 1;
                self.persist_counters()?;
                Ok(Some(entry.payload))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                self.counters.misses += 1;
                self.persist_counters()?;
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Store `payload` under the key of `input`.
    pub fn put(&mut self, input: &str, payload: &str) -> Result<()> {
        let key = key_of(input);
        let entry = Entry {
            key: key.clone(),
            created: now(),
            input: input.to_string(),
            payload: payload.to_string(),
        };
        let text = serde_json::to_string(&entry).expect("entry serializes");
        fs::write(self.entry_path(&key), text)?;
        Ok(())
    }

    fn keys(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for item in fs::read_dir(&self.dir)? {
            let name = item?.file_name();
            let name = name.to_string_lossy();
            if let Some(stem) = name.strip_suffix(".json") {
                if stem.len() == 64 && stem.bytes().all(|b| b.is_ascii_hexdigit()) {
                    out.push(stem.to_string());
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Recompute a random 1% sample (at least one entry) and compare the
    /// stored payloads bit-exactly. Returns the keys that disagree or are
    /// corrupt.
    pub fn verify(
        &self,
        seed: u64,
        recompute: &dyn Fn(&str) -> Result<String>,
    ) -> Result<Vec<String>> {
        let mut keys = self.keys()?;
        if keys.is_empty() {
            return Ok(Vec::new());
        }
        let sample = (keys.len() / 100).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        keys.shuffle(&mut rng);
        keys.truncate(sample);
        keys.sort();
        let mut bad = Vec::new();
        for key in keys {
            let text = fs::read_to_string(self.entry_path(&key))?;
            let entry: Entry = match serde_json::from_str(&text) {
                Ok(e) => e,
                Err(_) => {
                    bad.push(key);
                    continue;
                }
            };
            if entry.key != key || key_of(&entry.input) != key {
                bad.push(key);
                continue;
            }
            match recompute(&entry.input) {
                Ok(fresh) if fresh == entry.payload => {}
                _ => bad.push(key),
            }
        }
        Ok(bad)
    }

    /// Evict entries older than `max_age_secs`. Returns the eviction count.
    pub fn gc(&mut self, max_age_secs: u64) -> Result<usize> {
        let cutoff = now().saturating_sub(max_age_secs);
        let mut removed = 0;
        for key in self.keys()? {
            let path = self.entry_path(&key);
            let old = match fs::read_to_string(&path) {
                Ok(text) => match serde_json::from_str::<Entry>(&text) {
                    Ok(entry) => entry.created <= cutoff,
                    Err(_) => true, // unreadable entries go too
                },
                Err(_) => true,
            };
            if old {
                fs::remove_file(&path)?;
                removed += 1;
            }
        }
        Ok(removed)
    }

    pub fn stats(&self) -> Result<CacheStats> {
        Ok(CacheStats {
            entries: self.keys()?.len(),
            hits: self.counters.hits,
            misses: self.counters.misses,
        })
    }
}
