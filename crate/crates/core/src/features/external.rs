//! External reputation tables: the OpenSources list and host ranks.

use std::collections::{HashMap, HashSet};

use super::FeatureError;
use crate::ingest::registrable_domain;

/// Registrable domains flagged by the OpenSources project.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpenSourcesList {
    domains: HashSet<String>,
}

impl OpenSourcesList {
    /// One domain per line; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        let domains = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| registrable_domain(&l.trim_end_matches('.').to_ascii_lowercase()))
            .collect();
        OpenSourcesList { domains }
    }

    pub fn contains(&self, domain: &str) -> bool {
        self.domains.contains(domain)
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }
}

/// 1 if the host's registrable domain is listed, else 0.
pub fn opensources_flag(host: &str, list: &OpenSourcesList) -> f64 {
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    list.contains(&registrable_domain(&host)) as u8 as f64
}

/// Host → rank value, e.g. harmonic centrality or PageRank from a web
/// graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankTable {
    values: HashMap<String, f64>,
}

fn unreverse(host: &str) -> String {
    host.split('.').rev().collect::<Vec<_>>().join(".")
}

impl RankTable {
    /// `host TAB value` lines. A leading `#host_rev` header marks hosts
    /// written in reversed-label order (`org.example.www`).
    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let mut reversed = false;
        let mut values = HashMap::new();
        let mut seen_data = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if !seen_data && comment.split_whitespace().next() == Some("host_rev") {
                    reversed = true;
                }
                continue;
            }
            seen_data = true;
            let err = |reason: String| FeatureError::TableFormat {
                table: "rank".into(),
                line: i + 1,
                reason,
            };
            let mut parts = line.split('\t');
            let (Some(host), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(err("expected host<TAB>value".into()));
            };
            let value: f64 = value
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| err(format!("bad value {value:?}")))?;
            let host = host.trim().to_ascii_lowercase();
            if host.is_empty() {
                return Err(err("empty host".into()));
            }
            let host = if reversed { unreverse(&host) } else { host };
            values.insert(host, value);
        }
        Ok(RankTable { values })
    }

    /// Exact host first, then its registrable domain.
    pub fn lookup(&self, host: &str) -> Option<f64> {
        let host = host.trim_end_matches('.').to_ascii_lowercase();
        self.values
            .get(&host)
            .or_else(|| self.values.get(&registrable_domain(&host)))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `[value, 1]` when the host is ranked, `[0, 0]` otherwise.
pub fn pagerank_cc(host: &str, table: &RankTable) -> [f64; 2] {
    match table.lookup(host) {
        Some(v) => [v, 1.0],
        None => [0.0, 0.0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opensources_matching() {
        let list = OpenSourcesList::parse("# comment\nbad-news.com\nhoax.co.uk  # trailing\n");
        assert_eq!(opensources_flag("bad-news.com", &list), 1.0);
        assert_eq!(opensources_flag("good-news.com", &list), 0.0);
        assert_eq!(opensources_flag("www.Bad-News.com", &list), 1.0);
        assert_eq!(opensources_flag("a.hoax.co.uk", &list), 1.0);
    }

    #[test]
    fn rank_lookup() {
        let t = RankTable::parse("example.org\t3.7\nnews.site.com\t1.5\nsite.com\t0.5\n").unwrap();
        assert_eq!(pagerank_cc("example.org", &t), [3.7, 1.0]);
        assert_eq!(pagerank_cc("absent.net", &t), [0.0, 0.0]);
        assert_eq!(pagerank_cc("www.example.org", &t), [3.7, 1.0]);
        assert_eq!(pagerank_cc("news.site.com", &t), [1.5, 1.0]);
        assert_eq!(pagerank_cc("blog.site.com", &t), [0.5, 1.0]);
    }

    #[test]
    fn reversed_header() {
        let t = RankTable::parse("#host_rev\tvalue\norg.wikipedia\t9.1\nuk.co.bbc\t8.4\n").unwrap();
        assert_eq!(t.lookup("wikipedia.org"), Some(9.1));
        assert_eq!(t.lookup("news.bbc.co.uk"), Some(8.4));
    }

    #[test]
    fn malformed_rows() {
        assert!(matches!(
            RankTable::parse("a.com\t1\nb.com\tlots\n"),
            Err(FeatureError::TableFormat { line: 2, .. })
        ));
        assert!(RankTable::parse("a.com 1\n").is_err());
        assert!(RankTable::parse("a.com\tNaN\n").is_err());
    }
}
