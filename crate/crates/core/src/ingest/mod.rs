//! Fetching, caching and parsing of web documents.

mod domain;
mod fetch;
pub mod html;
mod sentences;
mod snapshot;

use chrono::{DateTime, Utc};
use thiserror::Error;

pub use domain::{public_suffix, registrable_domain, url_host};
pub use fetch::{fetch_page, FetchPolicy, Fetcher};
pub use html::{parse_html, parse_markup, Anchor, Link, ParsedPage};
pub use sentences::{split_sentences, RuleBasedSplitter, SentenceSplitter};
pub use snapshot::{ManifestRecord, SnapshotStore};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("invalid url {0:?}")]
    InvalidUrl(String),
    #[error("unreachable: {0}")]
    Unreachable(String),
    #[error("too many redirects (limit {limit})")]
    TooManyRedirects { limit: usize },
    #[error("http status {0}")]
    HttpError(u16),
    #[error("snapshot store error: {0}")]
    Store(#[from] std::io::Error),
    #[error("malformed manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error("url not cached: {0}")]
    NotCached(String),
    #[error("integrity check failed for {url}: expected {expected}, found {found}")]
    Integrity {
        url: String,
        expected: String,
        found: String,
    },
    #[error("cannot parse document: {0}")]
    Parse(String),
}

/// How a document was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FetchStatus {
    Http(u16),
    /// Loaded from the snapshot store; the original status is not persisted.
    Cached,
}

/// One fetched or cached web document.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDocument {
    pub url: String,
    pub fetched_at: Option<DateTime<Utc>>,
    pub status: FetchStatus,
    pub bytes: Vec<u8>,
    pub content_type: String,
    /// Set when the body was cut at the fetch policy's byte limit.
    pub truncated: bool,
}

impl RawDocument {
    /// A document built from in-memory markup, mostly for tests and fixtures.
    pub fn from_html(url: &str, html: &str) -> Self {
        RawDocument {
            url: url.to_string(),
            fetched_at: None,
            status: FetchStatus::Http(200),
            bytes: html.as_bytes().to_vec(),
            content_type: "text/html; charset=utf-8".into(),
            truncated: false,
        }
    }
}

/// Normalizes a URL for use as a cache and corpus key: host lowercased,
/// fragment removed, query kept.
pub fn normalize_url(raw: &str) -> Result<String, IngestError> {
    let mut u = url::Url::parse(raw.trim()).map_err(|_| IngestError::InvalidUrl(raw.to_string()))?;
    if u.cannot_be_a_base() {
        return Err(IngestError::InvalidUrl(raw.to_string()));
    }
    u.set_fragment(None);
    Ok(u.to_string())
}
