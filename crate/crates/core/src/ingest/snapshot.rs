//! Content-addressed snapshot cache.
//!
//! Layout: `<root>/manifest.txt` plus `<root>/objects/<first2>/<sha256>`.
//! Each manifest line is `url TAB hash TAB fetched_at TAB relative-path`;
//! later lines for the same URL supersede earlier ones.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use sha2::{Digest, Sha256};

use super::{FetchStatus, IngestError, RawDocument};

const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub hash: String,
    pub fetched_at: DateTime<Utc>,
    pub path: String,
}

/// Single-writer store; mutation goes through `&mut self`.
#[derive(Debug)]
pub struct SnapshotStore {
    root: PathBuf,
    index: BTreeMap<String, ManifestRecord>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl SnapshotStore {
    /// Opens (creating if needed) a store rooted at `root` and reads its
    /// manifest.
    pub fn open(root: impl AsRef<Path>) -> Result<Self, IngestError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(root.join("objects"))?;
        let mut index = BTreeMap::new();
        let manifest = root.join(MANIFEST);
        if manifest.exists() {
            let text = fs::read_to_string(&manifest)?;
            for (n, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let (url, rec) = parse_record(line).map_err(|reason| IngestError::Manifest {
                    line: n + 1,
                    reason,
                })?;
                index.insert(url, rec);
            }
        }
        Ok(SnapshotStore { root, index })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, url: &str) -> bool {
        self.index.contains_key(url)
    }

    pub fn record(&self, url: &str) -> Option<&ManifestRecord> {
        self.index.get(url)
    }

    /// Cached URLs in lexicographic order.
    pub fn urls(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    /// Persists a document and returns its snapshot id (the SHA-256 of its
    /// bytes). Storing identical bytes for a URL again is a no-op.
    pub fn store(&mut self, doc: &RawDocument) -> Result<String, IngestError> {
        let hash = sha256_hex(&doc.bytes);
        if self.index.get(&doc.url).is_some_and(|r| r.hash == hash) {
            return Ok(hash);
        }
        let rel = format!("objects/{}/{}", &hash[..2], hash);
        let path = self.root.join(&rel);
        if !path.exists() {
            fs::create_dir_all(path.parent().expect("object path has a parent"))?;
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, &doc.bytes)?;
            fs::rename(&tmp, &path)?;
        }
        let rec = ManifestRecord {
            hash: hash.clone(),
            fetched_at: doc.fetched_at.unwrap_or_else(Utc::now),
            path: rel,
        };
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.root.join(MANIFEST))?;
        writeln!(f, "{}", format_record(&doc.url, &rec))?;
        self.index.insert(doc.url.clone(), rec);
        Ok(hash)
    }

    /// Loads the stored bytes for a URL, verifying their hash.
    pub fn load(&self, url: &str) -> Result<RawDocument, IngestError> {
        let rec = self
            .index
            .get(url)
            .ok_or_else(|| IngestError::NotCached(url.to_string()))?;
        let bytes = fs::read(self.root.join(&rec.path))?;
        let found = sha256_hex(&bytes);
        if found != rec.hash {
            return Err(IngestError::Integrity {
                url: url.to_string(),
                expected: rec.hash.clone(),
                found,
            });
        }
        Ok(RawDocument {
            url: url.to_string(),
            fetched_at: Some(rec.fetched_at),
            status: FetchStatus::Cached,
            bytes,
            content_type: String::new(),
            truncated: false,
        })
    }
}

fn format_record(url: &str, rec: &ManifestRecord) -> String {
    format!(
        "{}\t{}\t{}\t{}",
        url,
        rec.hash,
        rec.fetched_at.to_rfc3339_opts(SecondsFormat::AutoSi, true),
        rec.path
    )
}

fn parse_record(line: &str) -> Result<(String, ManifestRecord), String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [url, hash, ts, path] = fields[..] else {
        return Err(format!("expected 4 fields, found {}", fields.len()));
    };
    if hash.len() != 64 || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(format!("bad hash {hash:?}"));
    }
    let fetched_at = DateTime::parse_from_rfc3339(ts)
        .map_err(|e| format!("bad timestamp {ts:?}: {e}"))?
        .with_timezone(&Utc);
    Ok((
        url.to_string(),
        ManifestRecord {
            hash: hash.to_string(),
            fetched_at,
            path: path.to_string(),
        },
    ))
}
