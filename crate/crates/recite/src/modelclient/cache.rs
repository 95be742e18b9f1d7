//! Content-addressed on-disk response cache, one file per request.
//!
//! The key is a cryptographic hash of the canonical request serialization,
//! so distinct (messages, params) pairs never share an entry. Entries land
//! under `cache/<first2-of-hash>/<hash>.json` holding the request, the
//! response, and a timestamp; identical re-writes are harmless.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ChatClient, ChatMessage, GenerationParams};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    request: serde_json::Value,
    response: String,
    timestamp: String,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ResponseCache { dir: dir.into() }
    }

    pub fn key(messages: &[ChatMessage], params: &GenerationParams) -> String {
        let canonical = serde_json::json!({
            "messages": messages,
            "params": params,
        });
        let mut hasher = Sha256::new();
        hasher.update(canonical.to_string().as_bytes());
        hex::encode(hasher.finalize())
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let path = self.path_for(key);
        if !path.exists() {
            return None;
        }
        match fs::read_to_string(&path) {
            Ok(text) => match serde_json::from_str::<CacheEntry>(&text) {
                Ok(entry) => Some(entry.response),
                Err(e) => {
                    log::warn!("cache entry {} is corrupt ({e}); bypassing", path.display());
                    None
                }
            },
            Err(e) => {
                log::warn!("cache entry {} unreadable ({e}); bypassing", path.display());
                None
            }
        }
    }

    pub fn put(
        &self,
        key: &str,
        messages: &[ChatMessage],
        params: &GenerationParams,
        response: &str,
    ) -> Result<()> {
        let path = self.path_for(key);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let entry = CacheEntry {
            request: serde_json::json!({ "messages": messages, "params": params }),
            response: response.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        };
        fs::write(&path, serde_json::to_string_pretty(&entry)?)?;
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

/// Wraps any client with the on-disk cache, making identical requests
/// idempotent and runs resumable.
pub struct CachedClient<C> {
    inner: C,
    cache: ResponseCache,
}

impl<C: ChatClient> CachedClient<C> {
    pub fn new(inner: C, cache: ResponseCache) -> Self {
        CachedClient { inner, cache }
    }
}

impl<C: ChatClient> ChatClient for CachedClient<C> {
    fn complete(&self, messages: &[ChatMessage], params: &GenerationParams) -> Result<String> {
        let key = ResponseCache::key(messages, params);
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit);
        }
        let response = self.inner.complete(messages, params)?;
        self.cache.put(&key, messages, params, &response)?;
        Ok(response)
    }
}
