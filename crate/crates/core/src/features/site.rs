//! Site-level signals: domain suffix, authority keywords, outbound links.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ingest::{public_suffix, registrable_domain, url_host, ParsedPage};

/// Protocol buckets for outbound link counts, in schema order.
pub const PROTOCOLS: [&str; 5] = ["http", "https", "ftp", "mailto", "other"];

/// Public-suffix vocabulary; id 0 is reserved for unknown suffixes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainVocab {
    ids: BTreeMap<String, u32>,
}

impl DomainVocab {
    /// Ids from 1 by descending frequency, ties lexicographic.
    pub fn build<S: AsRef<str>>(urls: &[S]) -> Self {
        let mut freq: HashMap<String, usize> = HashMap::new();
        for u in urls {
            if let Some(s) = url_host(u.as_ref()).and_then(|h| public_suffix(&h)) {
                *freq.entry(s).or_default() += 1;
            }
        }
        let mut order: Vec<(String, usize)> = freq.into_iter().collect();
        order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let ids = order
            .into_iter()
            .enumerate()
            .map(|(i, (s, _))| (s, i as u32 + 1))
            .collect();
        DomainVocab { ids }
    }

    pub fn from_map(ids: BTreeMap<String, u32>) -> Self {
        DomainVocab { ids }
    }

    pub fn as_map(&self) -> &BTreeMap<String, u32> {
        &self.ids
    }

    pub fn id(&self, suffix: &str) -> u32 {
        self.ids.get(suffix).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Id of the URL's public suffix; 0 when unknown or unparsable.
pub fn encode_domain(url: &str, vocab: &DomainVocab) -> u32 {
    url_host(url)
        .and_then(|h| public_suffix(&h))
        .map_or(0, |s| vocab.id(&s))
}

static CONTACT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(contact|get in touch|reach us|write to us)\b").unwrap());

static ADDRESS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?x)
        \b\d{1,5}\s+(?:[A-Z][A-Za-z]+\.?\s+){1,3}
        (?:Street|St|Avenue|Ave|Road|Rd|Boulevard|Blvd|Lane|Ln|Drive|Dr|Way|Court|Ct|Place|Pl|Square|Sq)\b
        |\bP\.?\s?O\.?\s+Box\s+\d+
        ",
    )
    .unwrap()
});

static COPYRIGHT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)©|\(c\)\s*\d{4}|\bcopyright\b").unwrap());

static ABOUT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\babout(?:[-_ ]?us)?\b").unwrap());

/// `[mailto links, contact anchors, postal-address hits, copyright notice,
/// about-page link]`.
pub fn authority_signals(page: &ParsedPage) -> [f64; 5] {
    let mailto = page.links.iter().filter(|l| l.protocol == "mailto").count();
    let contact = page.anchors.iter().filter(|a| CONTACT.is_match(&a.text)).count();
    let address = ADDRESS.find_iter(&page.body_text).count();
    let copyright = COPYRIGHT.is_match(&page.body_text) || page.html.contains("&copy;");
    let about = page.anchors.iter().any(|a| {
        let path = a.href.split(['?', '#']).next().unwrap_or("");
        let last = path.trim_end_matches('/').rsplit('/').next().unwrap_or("");
        ABOUT.is_match(last) || ABOUT.is_match(&a.text)
    });
    [
        mailto as f64,
        contact as f64,
        address as f64,
        copyright as u8 as f64,
        about as u8 as f64,
    ]
}

fn link_domain(link: &crate::ingest::Link) -> Option<String> {
    if link.protocol == "mailto" {
        let addr = link.target.split_once(':').map_or("", |(_, a)| a);
        let addr = addr.split(['?', ',']).next().unwrap_or("");
        let host = addr.rsplit_once('@')?.1.trim().trim_end_matches('.').to_ascii_lowercase();
        return (!host.is_empty()).then(|| registrable_domain(&host));
    }
    let host = url_host(link.resolved.as_deref()?)?;
    Some(registrable_domain(&host))
}

/// Distinct outbound targets per protocol bucket. A link is outbound when
/// its registrable domain differs from the page's.
pub fn outbound_link_counts(page: &ParsedPage) -> [f64; 5] {
    let mut seen: [BTreeSet<String>; 5] = Default::default();
    for link in &page.links {
        let Some(domain) = link_domain(link) else {
            continue;
        };
        if domain == page.domain {
            continue;
        }
        let bucket = PROTOCOLS[..4]
            .iter()
            .position(|p| *p == link.protocol)
            .unwrap_or(4);
        let key = link.resolved.clone().unwrap_or_else(|| link.target.clone());
        seen[bucket].insert(key);
    }
    seen.map(|s| s.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_markup;

    #[test]
    fn domain_ids() {
        let vocab = DomainVocab::from_map(BTreeMap::from([("org".to_string(), 3)]));
        assert_eq!(encode_domain("https://example.org/x", &vocab), 3);
        assert_eq!(encode_domain("https://example.zz-unknown/", &vocab), 0);
        assert_eq!(encode_domain("not a url", &vocab), 0);
        let built = DomainVocab::build(&["https://news.bbc.co.uk", "https://a.org", "https://b.org", "http://c.com"]);
        assert_eq!(built.id("org"), 1);
        assert_eq!(built.id("co.uk"), 2);
        assert_eq!(built.id("com"), 3);
        assert_eq!(encode_domain("https://news.bbc.co.uk", &built), 2);
    }

    #[test]
    fn authority_hand_counts() {
        let p = parse_markup(
            "https://example.org/",
            "<p>Hello</p><a href='mailto:desk@example.org'>email</a> <a href='/contact'>Contact us</a>",
        );
        assert_eq!(authority_signals(&p), [1.0, 1.0, 0.0, 0.0, 0.0]);
        let p = parse_markup("https://example.org/", "<footer>© 2024 <a href='/about'>Team</a></footer>");
        let s = authority_signals(&p);
        assert_eq!((s[3], s[4]), (1.0, 1.0));
        let p = parse_markup("https://example.org/", "<p>Visit 221 Baker Street or P.O. Box 12.</p>");
        assert_eq!(authority_signals(&p)[2], 2.0);
        assert_eq!(authority_signals(&parse_markup("https://example.org/", "")), [0.0; 5]);
    }

    #[test]
    fn outbound_hand_counts() {
        let p = parse_markup(
            "https://example.org/",
            "<a href='https://a.com/1'>x</a><a href='https://b.net/'>x</a><a href='http://c.io/'>x</a>\
             <a href='https://www.example.org/in'>x</a><a href='/local'>x</a><a href='https://a.com/1'>dup</a>",
        );
        assert_eq!(outbound_link_counts(&p), [1.0, 2.0, 0.0, 0.0, 0.0]);
        assert_eq!(outbound_link_counts(&parse_markup("https://example.org/", "")), [0.0; 5]);
    }

    #[test]
    fn mailto_and_other_protocols() {
        let p = parse_markup(
            "https://example.org/",
            "<a href='mailto:me@example.org'>in</a><a href='mailto:x@other.com'>out</a>\
             <a href='ftp://files.net/a'>f</a><a href='gopher://g.net/'>g</a><a href='javascript:void(0)'>j</a>",
        );
        assert_eq!(outbound_link_counts(&p), [0.0, 0.0, 1.0, 1.0, 1.0]);
    }
}
