//! Web-archive capture history and the archive freshness score.

use std::collections::HashMap;
use std::time::Duration;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};

use super::FeatureError;
use crate::ingest::{normalize_url, registrable_domain, url_host};

/// Penalization applied when captures come from the domain rather than the
/// exact URL.
pub const DOMAIN_FALLBACK_GAMMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceLevel {
    ExactUrl,
    DomainFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveTimeline {
    /// Capture times, ascending.
    pub snapshots: Vec<DateTime<Utc>>,
    pub source_level: SourceLevel,
    /// Reference "today"; fixed once per corpus run.
    pub queried_at: DateTime<Utc>,
}

impl ArchiveTimeline {
    pub fn new(mut snapshots: Vec<DateTime<Utc>>, source_level: SourceLevel, queried_at: DateTime<Utc>) -> Self {
        snapshots.sort();
        ArchiveTimeline {
            snapshots,
            source_level,
            queried_at,
        }
    }

    pub fn empty(queried_at: DateTime<Utc>) -> Self {
        Self::new(Vec::new(), SourceLevel::ExactUrl, queried_at)
    }

    pub fn gamma(&self, fallback_gamma: f64) -> f64 {
        match self.source_level {
            SourceLevel::ExactUrl => 1.0,
            SourceLevel::DomainFallback => fallback_gamma,
        }
    }

    /// Time differences in fractional days, or `None` without captures.
    pub fn deltas(&self) -> Option<ArchiveDeltas> {
        let s = &self.snapshots;
        let first = *s.first()?;
        let last = *s.last()?;
        let days = |a: DateTime<Utc>, b: DateTime<Utc>| (b - a).num_milliseconds() as f64 / 86_400_000.0;
        let n = s.len();
        Some(ArchiveDeltas {
            first_gap: (n >= 2).then(|| days(s[0], s[1])),
            last_gap: (n >= 2).then(|| days(s[n - 2], s[n - 1])),
            age: days(first, self.queried_at),
            since_update: days(last, self.queried_at),
        })
    }
}

/// Inputs of the archive score, in days.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchiveDeltas {
    /// Gap between the first two captures.
    pub first_gap: Option<f64>,
    /// Gap between the last two captures.
    pub last_gap: Option<f64>,
    /// Time from the first capture to the reference date.
    pub age: f64,
    /// Time from the last capture to the reference date.
    pub since_update: f64,
}

/// `(1/ln(Δb·Δe) + ln(Δa) + 1/Δu) · γ` with every Δ clamped below at one
/// day and `Δb·Δe` clamped below at e, so the first term never exceeds 1.
/// The first term is 0 when fewer than two captures exist.
pub fn archive_formula(d: &ArchiveDeltas, gamma: f64) -> f64 {
    let clamp = |v: f64| v.max(1.0);
    let first_term = match (d.first_gap, d.last_gap) {
        (Some(b), Some(e)) => 1.0 / (clamp(b) * clamp(e)).max(std::f64::consts::E).ln(),
        _ => 0.0,
    };
    (first_term + clamp(d.age).ln() + 1.0 / clamp(d.since_update)) * gamma
}

/// Archive score with the default domain-fallback penalization.
pub fn score_archive(t: &ArchiveTimeline) -> f64 {
    score_archive_with(t, DOMAIN_FALLBACK_GAMMA)
}

pub fn score_archive_with(t: &ArchiveTimeline, fallback_gamma: f64) -> f64 {
    match t.deltas() {
        Some(d) => archive_formula(&d, t.gamma(fallback_gamma)),
        None => 0.0,
    }
}

/// Source of capture timestamps for a URL or domain.
pub trait ArchiveClient: Sync {
    fn captures(&self, target: &str) -> Result<Vec<DateTime<Utc>>, FeatureError>;
}

/// Parses CDX 14-digit timestamps (shorter prefixes allowed), RFC 3339, or
/// plain `YYYY-MM-DD`.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if !s.is_empty() && s.len() <= 14 && s.bytes().all(|b| b.is_ascii_digit()) && s.len() >= 4 {
        const FILL: &str = "00000101000000";
        let full = format!("{s}{}", &FILL[s.len()..]);
        return NaiveDateTime::parse_from_str(&full, "%Y%m%d%H%M%S").ok().map(|n| n.and_utc());
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|n| n.and_utc())
}

fn fixture_key(target: &str) -> String {
    normalize_url(target).unwrap_or_else(|_| target.trim().to_ascii_lowercase())
}

/// Capture lists read from `target TAB timestamp` lines; targets are URLs
/// or bare domains.
#[derive(Debug, Clone, Default)]
pub struct FixtureArchive {
    captures: HashMap<String, Vec<DateTime<Utc>>>,
}

impl FixtureArchive {
    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let mut captures: HashMap<String, Vec<DateTime<Utc>>> = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| FeatureError::TableFormat {
                table: "archive".into(),
                line: n + 1,
                reason,
            };
            let (target, ts) = line.split_once('\t').ok_or_else(|| err("missing tab".into()))?;
            let t = parse_timestamp(ts).ok_or_else(|| err(format!("bad timestamp {ts:?}")))?;
            captures.entry(fixture_key(target)).or_default().push(t);
        }
        Ok(FixtureArchive { captures })
    }

    pub fn insert(&mut self, target: &str, times: Vec<DateTime<Utc>>) {
        self.captures.entry(fixture_key(target)).or_default().extend(times);
    }
}

impl ArchiveClient for FixtureArchive {
    fn captures(&self, target: &str) -> Result<Vec<DateTime<Utc>>, FeatureError> {
        Ok(self.captures.get(&fixture_key(target)).cloned().unwrap_or_default())
    }
}

/// Live CDX endpoint client (`<endpoint>?url=<target>&fl=timestamp`).
pub struct CdxArchive {
    endpoint: String,
    client: reqwest::blocking::Client,
}

impl CdxArchive {
    pub const WAYBACK: &'static str = "https://web.archive.org/cdx/search/cdx";

    pub fn new(endpoint: &str, timeout_secs: u64) -> Result<Self, FeatureError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(timeout_secs.max(1)))
            .build()
            .map_err(|e| FeatureError::ArchiveUnavailable(e.to_string()))?;
        Ok(CdxArchive {
            endpoint: endpoint.to_string(),
            client,
        })
    }
}

impl ArchiveClient for CdxArchive {
    fn captures(&self, target: &str) -> Result<Vec<DateTime<Utc>>, FeatureError> {
        let unavailable = |e: String| FeatureError::ArchiveUnavailable(e);
        let resp = self
            .client
            .get(&self.endpoint)
            .query(&[("url", target), ("fl", "timestamp"), ("filter", "statuscode:200")])
            .send()
            .map_err(|e| unavailable(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(unavailable(format!("status {}", resp.status())));
        }
        let body = resp.text().map_err(|e| unavailable(e.to_string()))?;
        Ok(body.lines().filter_map(parse_timestamp).collect())
    }
}

/// Captures for the exact URL, falling back to its registrable domain.
pub fn query_archive(
    url: &str,
    client: &dyn ArchiveClient,
    queried_at: DateTime<Utc>,
) -> Result<ArchiveTimeline, FeatureError> {
    let exact = client.captures(url)?;
    if !exact.is_empty() {
        return Ok(ArchiveTimeline::new(exact, SourceLevel::ExactUrl, queried_at));
    }
    if let Some(host) = url_host(url) {
        let domain = client.captures(&registrable_domain(&host))?;
        if !domain.is_empty() {
            return Ok(ArchiveTimeline::new(domain, SourceLevel::DomainFallback, queried_at));
        }
    }
    Ok(ArchiveTimeline::empty(queried_at))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn day(y: i32, m: u32, d: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap()
    }

    #[test]
    fn worked_example() {
        let d = ArchiveDeltas {
            first_gap: Some(2.0),
            last_gap: Some(5.0),
            age: 1000.0,
            since_update: 10.0,
        };
        let expected = 1.0 / 10f64.ln() + 1000f64.ln() + 0.1;
        assert!((archive_formula(&d, 1.0) - expected).abs() < 1e-12);
        assert!((archive_formula(&d, 1.0) - 7.442_05).abs() < 1e-5);
        assert!((archive_formula(&d, 0.5) - 3.721_02).abs() < 1e-5);
    }

    #[test]
    fn timeline_deltas() {
        let t = ArchiveTimeline::new(
            vec![day(2010, 1, 3), day(2010, 1, 1), day(2020, 1, 1)],
            SourceLevel::ExactUrl,
            day(2020, 1, 11),
        );
        let d = t.deltas().unwrap();
        assert_eq!(d.first_gap, Some(2.0));
        // 2010-01-01..2020-01-01 spans 3652 days (two leap years)
        assert_eq!(d.last_gap, Some(3650.0));
        assert_eq!(d.age, 3662.0);
        assert_eq!(d.since_update, 10.0);
    }

    #[test]
    fn empty_and_single_capture() {
        let now = day(2020, 1, 1);
        assert_eq!(score_archive(&ArchiveTimeline::empty(now)), 0.0);
        let t = ArchiveTimeline::new(vec![day(2019, 12, 22)], SourceLevel::ExactUrl, now);
        assert!((score_archive(&t) - (10f64.ln() + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn clamps_keep_score_finite() {
        let now = day(2020, 1, 1);
        let t = ArchiveTimeline::new(vec![now, now, now], SourceLevel::ExactUrl, now);
        let s = score_archive(&t);
        assert!(s.is_finite());
        assert!((s - 2.0).abs() < 1e-12); // 1/ln(e) + ln(1) + 1/1
    }

    #[test]
    fn fallback_to_domain() {
        let mut fx = FixtureArchive::default();
        fx.insert("https://example.org/a", vec![day(2010, 1, 1), day(2010, 1, 3), day(2020, 1, 1)]);
        fx.insert("example.org", vec![day(2001, 1, 1)]);
        let now = day(2021, 1, 1);
        let t = query_archive("https://example.org/a", &fx, now).unwrap();
        assert_eq!((t.snapshots.len(), t.source_level), (3, SourceLevel::ExactUrl));
        let t = query_archive("https://www.example.org/other", &fx, now).unwrap();
        assert_eq!((t.snapshots.len(), t.source_level), (1, SourceLevel::DomainFallback));
        let t = query_archive("https://unknown.net/", &fx, now).unwrap();
        assert!(t.snapshots.is_empty());
    }

    #[test]
    fn fixture_parsing() {
        let fx = FixtureArchive::parse("# c\nhttps://a.org/\t20100101000000\nhttps://a.org/\t2011-02-03\na.org\t2012\n").unwrap();
        assert_eq!(fx.captures("https://a.org/").unwrap(), vec![day(2010, 1, 1), day(2011, 2, 3)]);
        assert_eq!(fx.captures("a.org").unwrap(), vec![day(2012, 1, 1)]);
        assert!(FixtureArchive::parse("https://a.org/\tyesterday\n").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn deltas() -> impl Strategy<Value = ArchiveDeltas> {
            (prop::option::of(0.0f64..5000.0), 0.0f64..5000.0, 0.0f64..20000.0, 0.0f64..20000.0).prop_map(
                |(b, e, a, u)| ArchiveDeltas {
                    first_gap: b,
                    last_gap: b.map(|_| e),
                    age: a,
                    since_update: u,
                },
            )
        }

        proptest! {
            #[test]
            fn older_first_capture_scores_higher(d in deltas(), extra in 0.01f64..1000.0) {
                let aged = ArchiveDeltas { age: d.age.max(1.0) + extra, ..d };
                prop_assert!(archive_formula(&aged, 1.0) > archive_formula(&d, 1.0));
            }

            #[test]
            fn staler_last_capture_never_scores_higher(d in deltas(), extra in 0.0f64..1000.0) {
                let stale = ArchiveDeltas { since_update: d.since_update + extra, ..d };
                prop_assert!(archive_formula(&stale, 1.0) <= archive_formula(&d, 1.0));
            }

            #[test]
            fn fallback_halves_score(offsets in prop::collection::vec(0i64..100_000, 0..6), now in 100_000i64..200_000) {
                let base = day(2000, 1, 1);
                let snaps: Vec<_> = offsets.iter().map(|h| base + chrono::Duration::hours(*h)).collect();
                let q = base + chrono::Duration::hours(now);
                let exact = ArchiveTimeline::new(snaps.clone(), SourceLevel::ExactUrl, q);
                let domain = ArchiveTimeline::new(snaps, SourceLevel::DomainFallback, q);
                prop_assert!((score_archive(&domain) - 0.5 * score_archive(&exact)).abs() < 1e-12);
                prop_assert!(score_archive(&exact).is_finite());
            }
        }
    }
}
