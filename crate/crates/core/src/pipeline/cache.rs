//! Content-addressed response store on disk.
//!
//! Each entry lives at `<root>/<first two hex chars>/<sha256 hex>.json` and
//! is written to a temporary file first, then renamed into place, so a
//! reader never sees a partial entry. Writes are serialized by a mutex;
//! reads take no lock.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Serialize, Deserialize)]
struct Entry {
    client: String,
    action: String,
    input: String,
    output: String,
}

pub struct ResponseCache {
    root: PathBuf,
    write_lock: Mutex<()>,
}

impl ResponseCache {
    pub fn open(root: impl Into<PathBuf>) -> std::io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(ResponseCache { root, write_lock: Mutex::new(()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Hex SHA-256 over client id, action, and input, NUL-separated.
    pub fn key(client: &str, action: &str, input: &str) -> String {
        let mut h = Sha256::new();
        for part in [client, action, input] {
            h.update(part.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.root.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, client: &str, action: &str, input: &str) -> Option<String> {
        let raw = fs::read_to_string(self.path_for(&Self::key(client, action, input))).ok()?;
        let entry: Entry = serde_json::from_str(&raw).ok()?;
        // a hash collision or a foreign file is treated as a miss
        (entry.client == client && entry.action == action && entry.input == input).then_some(entry.output)
    }

    pub fn put(&self, client: &str, action: &str, input: &str, output: &str) -> std::io::Result<()> {
        let key = Self::key(client, action, input);
        let path = self.path_for(&key);
        let entry = Entry { client: client.into(), action: action.into(), input: input.into(), output: output.into() };
        let body = serde_json::to_vec(&entry).expect("cache entry serializes");
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        let dir = path.parent().expect("entry path has a parent");
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(".{key}.tmp"));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&body)?;
        f.sync_all()?;
        fs::rename(&tmp, &path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let c = ResponseCache::open(dir.path()).unwrap();
        assert_eq!(c.get("gt", "translate", "مرحبا"), None);
        c.put("gt", "translate", "مرحبا", "hello").unwrap();
        assert_eq!(c.get("gt", "translate", "مرحبا").as_deref(), Some("hello"));
        assert_eq!(c.get("other", "translate", "مرحبا"), None);
        let key = ResponseCache::key("gt", "translate", "مرحبا");
        assert!(dir.path().join(&key[..2]).join(format!("{key}.json")).exists());
    }

    #[test]
    fn reopened_cache_sees_entries() {
        let dir = tempfile::tempdir().unwrap();
        ResponseCache::open(dir.path()).unwrap().put("c", "a", "x", "y").unwrap();
        assert_eq!(ResponseCache::open(dir.path()).unwrap().get("c", "a", "x").as_deref(), Some("y"));
    }

    #[test]
    fn key_separates_fields() {
        assert_ne!(ResponseCache::key("ab", "c", "d"), ResponseCache::key("a", "bc", "d"));
    }
}
