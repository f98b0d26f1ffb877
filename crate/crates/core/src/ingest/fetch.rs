use std::collections::HashMap;
use std::io::Read;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::Utc;
use serde::{Deserialize, Serialize};

use super::domain::url_host;
use super::{FetchStatus, IngestError, RawDocument};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FetchPolicy {
    pub timeout_secs: u64,
    pub max_bytes: usize,
    pub max_redirects: usize,
    pub user_agent: String,
    /// Requests per second per host; 0 disables the limit.
    pub per_host_rps: f64,
    pub max_in_flight: usize,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        FetchPolicy {
            timeout_secs: 20,
            max_bytes: 5 * 1024 * 1024,
            max_redirects: 5,
            user_agent: concat!("webcred/", env!("CARGO_PKG_VERSION")).to_string(),
            per_host_rps: 1.0,
            max_in_flight: 8,
        }
    }
}

/// Blocking HTTP fetcher with redirect, size and per-host rate limits.
pub struct Fetcher {
    client: reqwest::blocking::Client,
    policy: FetchPolicy,
    next_slot: Mutex<HashMap<String, Instant>>,
}

impl Fetcher {
    pub fn new(policy: FetchPolicy) -> Result<Self, IngestError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(policy.timeout_secs.max(1)))
            .redirect(reqwest::redirect::Policy::limited(policy.max_redirects))
            .user_agent(policy.user_agent.clone())
            .build()
            .map_err(|e| IngestError::Unreachable(e.to_string()))?;
        Ok(Fetcher {
            client,
            policy,
            next_slot: Mutex::new(HashMap::new()),
        })
    }

    pub fn policy(&self) -> &FetchPolicy {
        &self.policy
    }

    /// Blocks until the host's next request slot.
    fn wait_for_slot(&self, host: &str) {
        if self.policy.per_host_rps <= 0.0 {
            return;
        }
        let interval = Duration::from_secs_f64(1.0 / self.policy.per_host_rps);
        let wait = {
            let mut slots = self.next_slot.lock().expect("rate limiter poisoned");
            let now = Instant::now();
            let slot = slots.get(host).copied().filter(|s| *s > now).unwrap_or(now);
            slots.insert(host.to_string(), slot + interval);
            slot.saturating_duration_since(now)
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }

    /// Fetches one URL. Bodies over `max_bytes` are cut and flagged, not
    /// rejected.
    pub fn fetch(&self, url: &str) -> Result<RawDocument, IngestError> {
        let parsed = url::Url::parse(url).map_err(|_| IngestError::InvalidUrl(url.to_string()))?;
        if !matches!(parsed.scheme(), "http" | "https") {
            return Err(IngestError::InvalidUrl(url.to_string()));
        }
        self.wait_for_slot(&url_host(url).unwrap_or_default());
        let resp = self.client.get(parsed).send().map_err(|e| {
            if e.is_redirect() {
                IngestError::TooManyRedirects {
                    limit: self.policy.max_redirects,
                }
            } else {
                IngestError::Unreachable(e.to_string())
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(IngestError::HttpError(status.as_u16()));
        }
        let content_type = resp
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or("")
            .to_string();
        let mut bytes = Vec::new();
        resp.take(self.policy.max_bytes as u64 + 1)
            .read_to_end(&mut bytes)
            .map_err(|e| IngestError::Unreachable(e.to_string()))?;
        let truncated = bytes.len() > self.policy.max_bytes;
        if truncated {
            bytes.truncate(self.policy.max_bytes);
            log::warn!("{url}: body truncated at {} bytes", self.policy.max_bytes);
        }
        Ok(RawDocument {
            url: url.to_string(),
            fetched_at: Some(Utc::now()),
            status: FetchStatus::Http(status.as_u16()),
            bytes,
            content_type,
            truncated,
        })
    }

    /// Fetches many URLs with at most `max_in_flight` concurrent requests.
    /// Results are returned in input order.
    pub fn fetch_all(&self, urls: &[String]) -> Vec<Result<RawDocument, IngestError>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.policy.max_in_flight.max(1))
            .build();
        match pool {
            Ok(pool) => pool.install(|| {
                use rayon::prelude::*;
                urls.par_iter().map(|u| self.fetch(u)).collect()
            }),
            Err(_) => urls.iter().map(|u| self.fetch(u)).collect(),
        }
    }
}

/// Fetches `url` with a one-off fetcher.
pub fn fetch_page(url: &str, policy: &FetchPolicy) -> Result<RawDocument, IngestError> {
    Fetcher::new(policy.clone())?.fetch(url)
}
