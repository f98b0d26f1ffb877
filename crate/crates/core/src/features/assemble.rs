//! Concatenation of all per-page extractors into one schema-ordered vector.

use serde::{Deserialize, Serialize};

use super::archive::{score_archive_with, ArchiveTimeline, SourceLevel, DOMAIN_FALLBACK_GAMMA};
use super::category::{category_vector, category_vector_summarized, spam_flags, BinaryTextScorer, CategoryModelSet, CategoryScorer, TextNb, CATEGORIES};
use super::external::{opensources_flag, pagerank_cc, OpenSourcesList, RankTable};
use super::lexicon::{gi_vector, sentiment_vector, social_tag_counts, LexiconTable, DEFAULT_SOCIAL_MARKERS, GI_WIDTH};
use super::readability::{readability_vector, READABILITY_METRICS};
use super::site::{authority_signals, encode_domain, outbound_link_counts, DomainVocab, PROTOCOLS};
use super::summarize::Summarizer;
use super::FeatureVector;
use crate::data;
use crate::ingest::{url_host, ParsedPage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub social_markers: Vec<String>,
    /// Sentences kept by each summarizer.
    pub summary_n: usize,
    /// Archive penalization for domain-level captures.
    pub fallback_gamma: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            social_markers: DEFAULT_SOCIAL_MARKERS.iter().map(|s| s.to_string()).collect(),
            summary_n: 5,
            fallback_gamma: DOMAIN_FALLBACK_GAMMA,
        }
    }
}

/// Loaded models and tables. Absent tables fall back to defined values and
/// are noted in each page's provenance.
#[derive(Clone, Copy)]
pub struct Resources<'a> {
    pub categories: &'a dyn CategoryScorer,
    pub spam: &'a dyn BinaryTextScorer,
    pub gi: Option<&'a LexiconTable>,
    pub valence: Option<&'a LexiconTable>,
    pub opensources: Option<&'a OpenSourcesList>,
    pub ranks: Option<&'a RankTable>,
    pub domain_vocab: &'a DomainVocab,
}

impl<'a> Resources<'a> {
    /// Bundled category and spam models with no external tables.
    pub fn bundled(domain_vocab: &'a DomainVocab) -> Self {
        Resources {
            categories: CategoryModelSet::bundled(),
            spam: TextNb::spam(),
            gi: None,
            valence: None,
            opensources: None,
            ranks: None,
            domain_vocab,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub vector: FeatureVector,
    /// Fallbacks taken while extracting, in schema order.
    pub provenance: Vec<String>,
}

fn category_names(prefix: &str) -> impl Iterator<Item = String> + '_ {
    let sent = CATEGORIES.iter().map(move |c| format!("{prefix}:sent:{c}"));
    let title = CATEGORIES.iter().map(move |c| format!("{prefix}:title:{c}"));
    sent.chain(title)
}

/// Column names for a configuration, in value order.
pub fn feature_schema(config: &FeatureConfig) -> Vec<String> {
    let mut s = vec!["f_arc".to_string(), "domain_id".to_string()];
    s.extend(["mailto", "contact", "address", "copyright", "about"].map(|a| format!("authority:{a}")));
    s.extend(PROTOCOLS.map(|p| format!("outbound:{p}")));
    s.extend(category_names("category"));
    s.extend(category_names("category_lexrank"));
    s.extend(category_names("category_lsa"));
    s.extend(READABILITY_METRICS.map(|m| format!("readability:{m}")));
    s.extend(["spam:body".to_string(), "spam:title".to_string()]);
    s.extend(config.social_markers.iter().map(|m| format!("social:{m}")));
    s.push("opensources".into());
    s.extend(["pagerank_cc".to_string(), "pagerank_cc:present".to_string()]);
    s.extend(data::lines(data::GI_CATEGORIES).map(|c| format!("gi:{c}")));
    s.extend(["pos", "neg", "neu", "mean_valence"].map(|m| format!("sentiment:{m}")));
    s
}

/// Extracts every feature for one page. `timeline` is `None` when the
/// archive is disabled or was unreachable.
pub fn assemble_features(
    page: &ParsedPage,
    timeline: Option<&ArchiveTimeline>,
    res: &Resources<'_>,
    config: &FeatureConfig,
) -> Extraction {
    let mut v: Vec<f64> = Vec::with_capacity(256);
    let mut notes = Vec::new();

    match timeline {
        None => {
            notes.push("archive: unavailable, f_arc=0".to_string());
            v.push(0.0);
        }
        Some(t) => {
            if t.snapshots.is_empty() {
                notes.push("archive: no captures, f_arc=0".to_string());
            } else if t.source_level == SourceLevel::DomainFallback {
                notes.push(format!("archive: domain captures, gamma={}", config.fallback_gamma));
            }
            v.push(score_archive_with(t, config.fallback_gamma));
        }
    }
    let domain_id = encode_domain(&page.url, res.domain_vocab);
    if domain_id == 0 {
        notes.push("domain_id: unknown suffix".to_string());
    }
    v.push(domain_id as f64);
    v.extend(authority_signals(page));
    v.extend(outbound_link_counts(page));

    if page.sentences.is_empty() {
        notes.push("category: no sentences, 0.5 prior".to_string());
    }
    if page.title.trim().is_empty() {
        notes.push("category: empty title, 0.5 prior".to_string());
    }
    v.extend(category_vector(page, res.categories));
    v.extend(category_vector_summarized(page, res.categories, Summarizer::LexRank, config.summary_n));
    v.extend(category_vector_summarized(page, res.categories, Summarizer::Lsa, config.summary_n));
    v.extend(readability_vector(&page.body_text));
    v.extend(spam_flags(page, res.spam));
    v.extend(social_tag_counts(&page.body_text, &config.social_markers));

    let host = url_host(&page.url).unwrap_or_default();
    match res.opensources {
        Some(list) => v.push(opensources_flag(&host, list)),
        None => {
            notes.push("opensources: list unavailable".to_string());
            v.push(0.0);
        }
    }
    match res.ranks {
        Some(t) => v.extend(pagerank_cc(&host, t)),
        None => {
            notes.push("pagerank_cc: table unavailable".to_string());
            v.extend([0.0, 0.0]);
        }
    }
    match res.gi {
        Some(gi) if gi.category_order.len() == GI_WIDTH => v.extend(gi_vector(&page.body_text, gi)),
        Some(_) => {
            notes.push("gi: table has wrong width, zeros".to_string());
            v.extend([0.0; GI_WIDTH]);
        }
        None => {
            notes.push("gi: table unavailable, zeros".to_string());
            v.extend([0.0; GI_WIDTH]);
        }
    }
    match res.valence {
        Some(t) => v.extend(sentiment_vector(&page.body_text, t)),
        None => {
            notes.push("sentiment: table unavailable".to_string());
            v.extend([0.0, 0.0, 1.0, 0.0]);
        }
    }

    for x in v.iter_mut() {
        if !x.is_finite() {
            *x = 0.0;
        }
    }
    Extraction {
        vector: FeatureVector::new(feature_schema(config), v),
        provenance: notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_markup;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    #[test]
    fn schema_length() {
        assert_eq!(feature_schema(&FeatureConfig::default()).len(), 255);
        let s = feature_schema(&FeatureConfig::default());
        let mut u = s.clone();
        u.sort();
        u.dedup();
        assert_eq!(u.len(), s.len());
    }

    #[test]
    fn empty_page_is_all_fallback() {
        let vocab = DomainVocab::default();
        let res = Resources::bundled(&vocab);
        let e = assemble_features(&ParsedPage::default(), None, &res, &FeatureConfig::default());
        assert_eq!(e.vector.len(), 255);
        assert!(e.vector.is_finite());
        assert_eq!(e.vector.get("f_arc"), Some(0.0));
        assert_eq!(e.vector.get("category:sent:tech"), Some(0.5));
        assert_eq!(e.vector.get("sentiment:neu"), Some(1.0));
        assert!(e.provenance.iter().any(|n| n.starts_with("archive")));
    }

    #[test]
    fn tables_and_timeline_flow_through() {
        let vocab = DomainVocab::build(&["https://news.example.org/"]);
        let gi = LexiconTable::general_inquirer("good\tPositiv\n").unwrap();
        let valence = LexiconTable::valence("v", "good\t2\n").unwrap();
        let os = OpenSourcesList::parse("example.org\n");
        let ranks = RankTable::parse("example.org\t3.7\n").unwrap();
        let res = Resources {
            gi: Some(&gi),
            valence: Some(&valence),
            opensources: Some(&os),
            ranks: Some(&ranks),
            ..Resources::bundled(&vocab)
        };
        let page = parse_markup("https://news.example.org/a", "<title>Good</title><p>A good day. Share it.</p>");
        let now = Utc.with_ymd_and_hms(2020, 1, 11, 0, 0, 0).unwrap();
        let t = ArchiveTimeline::new(vec![Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap()], SourceLevel::DomainFallback, now);
        let e = assemble_features(&page, Some(&t), &res, &FeatureConfig::default());
        let v = &e.vector;
        assert!((v.get("f_arc").unwrap() - 0.5 * (10f64.ln() + 0.1)).abs() < 1e-12);
        assert_eq!(v.get("domain_id"), Some(1.0));
        assert_eq!(v.get("opensources"), Some(1.0));
        assert_eq!(v.get("pagerank_cc"), Some(3.7));
        assert_eq!(v.get("pagerank_cc:present"), Some(1.0));
        assert_eq!(v.get("gi:Positiv"), Some(0.2));
        assert_eq!(v.get("sentiment:mean_valence"), Some(2.0));
        assert_eq!(v.get("social:share"), Some(1.0));
        assert_eq!(e.provenance, ["archive: domain captures, gamma=0.5"]);
    }

    #[test]
    fn marker_order_moves_names_and_values_together() {
        let vocab = DomainVocab::default();
        let res = Resources::bundled(&vocab);
        let page = parse_markup("https://a.org/", "<p>follow follow share</p>");
        let a = FeatureConfig {
            social_markers: vec!["share".into(), "follow".into()],
            ..FeatureConfig::default()
        };
        let b = FeatureConfig {
            social_markers: vec!["follow".into(), "share".into()],
            ..FeatureConfig::default()
        };
        let (ea, eb) = (assemble_features(&page, None, &res, &a), assemble_features(&page, None, &res, &b));
        assert_ne!(ea.vector.schema, eb.vector.schema);
        for name in ["social:share", "social:follow"] {
            assert_eq!(ea.vector.get(name), eb.vector.get(name));
        }
        assert_eq!(ea.vector.get("social:follow"), Some(2.0));
        assert_eq!(ea.vector.len(), 249);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn totality_on_random_markup(html in "[<>a-z /=\"'.!?&;©0-9]{0,200}") {
            let vocab = DomainVocab::default();
            let res = Resources::bundled(&vocab);
            let page = parse_markup("https://x.org/", &html);
            let e = assemble_features(&page, None, &res, &FeatureConfig::default());
            prop_assert_eq!(e.vector.schema.len(), e.vector.values.len());
            prop_assert!(e.vector.is_finite());
        }
    }
}
