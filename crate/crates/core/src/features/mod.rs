//! Content and lexical features of a parsed page.

mod archive;
mod assemble;
mod category;
mod external;
mod lexicon;
mod readability;
mod site;
pub mod summarize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use archive::{
    archive_formula, parse_timestamp, query_archive, score_archive, score_archive_with, ArchiveClient, ArchiveDeltas, ArchiveTimeline,
    CdxArchive, FixtureArchive, SourceLevel, DOMAIN_FALLBACK_GAMMA,
};
pub use assemble::{assemble_features, feature_schema, Extraction, FeatureConfig, Resources};
pub use category::{
    category_vector, category_vector_summarized, spam_flags, BinaryTextScorer, CategoryModelSet, CategoryScorer, TextNb,
    Vocabulary, CATEGORIES,
};
pub use external::{opensources_flag, pagerank_cc, OpenSourcesList, RankTable};
pub use lexicon::{gi_vector, sentiment_vector, social_tag_counts, LexiconTable, DEFAULT_SOCIAL_MARKERS, GI_WIDTH};
pub use readability::{count_syllables, readability_vector, READABILITY_METRICS};
pub use site::{authority_signals, encode_domain, outbound_link_counts, DomainVocab, PROTOCOLS};
pub use summarize::{lexrank_scores, lexrank_top, lsa_scores, lsa_top, Summarizer};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("archive unavailable: {0}")]
    ArchiveUnavailable(String),
    #[error("{table} line {line}: {reason}")]
    TableFormat {
        table: String,
        line: usize,
        reason: String,
    },
    #[error("lexicon {name} has {found} categories, expected {expected}")]
    LexiconShape {
        name: String,
        found: usize,
        expected: usize,
    },
    #[error(transparent)]
    Learn(#[from] crate::learn::LearnError),
}

/// A schema-ordered numeric vector for one page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub schema: Vec<String>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    /// Panics if `schema` and `values` differ in length.
    pub fn new(schema: Vec<String>, values: Vec<f64>) -> Self {
        assert_eq!(schema.len(), values.len(), "schema and values must align");
        FeatureVector { schema, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.schema.iter().position(|s| s == name).map(|i| self.values[i])
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
