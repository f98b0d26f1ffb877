//! Automated credibility scoring for web pages.
//!
//! The crate is organised as a pipeline:
//!
//! - [`ingest`] fetches pages (or loads them from a content-addressed
//!   snapshot cache) and parses them into a [`ingest::ParsedPage`].
//! - [`features`] turns a parsed page into a schema-ordered
//!   [`features::FeatureVector`] of content and lexical signals.
//! - [`html2seq`] encodes the leading window of a page's tag stream as a
//!   bag-of-tags vector.
//! - [`learn`] holds the learners, percentile feature selection and the
//!   tag-probability stacking combiner.
//! - [`eval`] maps Likert ratings to class schemes, computes metrics and
//!   runs cross-validation and padding sweeps.
//! - [`corpus`] loads rated URL corpora and claim-evidence files and
//!   produces the fact-checking impact table.

pub mod corpus;
pub mod data;
pub mod eval;
pub mod features;
pub mod html2seq;
pub mod ingest;
pub mod learn;
pub mod text;
