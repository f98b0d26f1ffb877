//! Bag-of-tags encoding of a page's leading tag window.
//!
//! A page's tag stream (opening and closing tags, in document order) is
//! mapped through a corpus-level vocabulary, cut or zero-padded to a fixed
//! window taken from the start of the document, and then counted per tag id.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::ingest::html::{tokenize, HtmlToken};

pub const PAD_ID: u32 = 0;
pub const UNKNOWN_ID: u32 = 1;

/// Padding grid used by the sweep experiments.
pub const DEFAULT_PAD_GRID: [usize; 10] = [25, 50, 100, 175, 250, 500, 1000, 2500, 5000, 10000];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Html2SeqError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("malformed vocabulary line {line}: {reason}")]
    VocabFormat { line: usize, reason: String },
}

/// Lowercase tag names in document order, closing tags prefixed `/`.
pub fn tokenize_tags(html: &str) -> Vec<String> {
    tokenize(html)
        .into_iter()
        .filter_map(|t| match t {
            HtmlToken::Start { name, .. } => Some(name),
            HtmlToken::End { name } => Some(format!("/{name}")),
            _ => None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagVocab {
    ids: HashMap<String, u32>,
    /// Tag names indexed by `id - 2`.
    names: Vec<String>,
}

impl TagVocab {
    /// Assigns ids by descending corpus frequency, ties broken
    /// lexicographically. Ids 0 and 1 are reserved for pad and unknown.
    pub fn build<S: AsRef<str>>(corpus: &[Vec<S>]) -> Result<Self, Html2SeqError> {
        let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
        for stream in corpus {
            for tag in stream {
                *freq.entry(tag.as_ref()).or_default() += 1;
            }
        }
        if freq.is_empty() {
            return Err(Html2SeqError::EmptyCorpus);
        }
        let mut ranked: Vec<(&str, usize)> = freq.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Self::from_names(ranked.into_iter().map(|(t, _)| t.to_string()).collect()))
    }

    fn from_names(names: Vec<String>) -> Self {
        let ids = names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32 + 2)).collect();
        TagVocab { ids, names }
    }

    pub fn id(&self, tag: &str) -> u32 {
        self.ids.get(tag).copied().unwrap_or(UNKNOWN_ID)
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        id.checked_sub(2).and_then(|i| self.names.get(i as usize)).map(String::as_str)
    }

    /// Number of ids including the two reserved ones.
    pub fn size(&self) -> usize {
        self.names.len() + 2
    }

    /// `tag TAB id` lines in id order.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for (i, n) in self.names.iter().enumerate() {
            let _ = writeln!(s, "{n}\t{}", i + 2);
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self, Html2SeqError> {
        let mut rows: Vec<(u32, String)> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |reason: &str| Html2SeqError::VocabFormat {
                line: n + 1,
                reason: reason.to_string(),
            };
            let (tag, id) = line.split_once('\t').ok_or_else(|| err("missing tab"))?;
            let id: u32 = id.trim().parse().map_err(|_| err("bad id"))?;
            rows.push((id, tag.to_string()));
        }
        rows.sort();
        for (i, (id, _)) in rows.iter().enumerate() {
            if *id != i as u32 + 2 {
                return Err(Html2SeqError::VocabFormat {
                    line: i + 1,
                    reason: format!("ids must be dense from 2, found {id}"),
                });
            }
        }
        Ok(Self::from_names(rows.into_iter().map(|(_, t)| t).collect()))
    }
}

/// A fixed-length window of encoded tag ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSequence {
    pub ids: Vec<u32>,
    pub pad: usize,
    pub source_len: usize,
}

/// Encodes the first `pad` tags; shorter streams are zero-padded.
pub fn encode_window<S: AsRef<str>>(tags: &[S], vocab: &TagVocab, pad: usize) -> TagSequence {
    assert!(pad >= 1, "window length must be at least 1");
    let mut ids: Vec<u32> = tags.iter().take(pad).map(|t| vocab.id(t.as_ref())).collect();
    ids.resize(pad, PAD_ID);
    TagSequence {
        ids,
        pad,
        source_len: tags.len(),
    }
}

/// Decodes a window back to tag names; pad entries are dropped and unknown
/// ids decode to `None`.
pub fn decode_window(seq: &TagSequence, vocab: &TagVocab) -> Vec<Option<String>> {
    seq.ids
        .iter()
        .filter(|&&id| id != PAD_ID)
        .map(|&id| vocab.name(id).map(str::to_string))
        .collect()
}

/// Per-id occurrence counts within the window (index = id); the pad slot is
/// always zero.
pub fn window_to_counts(seq: &TagSequence, vocab: &TagVocab) -> Vec<f64> {
    let mut counts = vec![0.0; vocab.size()];
    for &id in &seq.ids {
        if id != PAD_ID {
            if let Some(c) = counts.get_mut(id as usize) {
                *c += 1.0;
            }
        }
    }
    counts
}

/// Feature names for [`window_to_counts`] columns.
pub fn count_schema(vocab: &TagVocab) -> Vec<String> {
    (0..vocab.size() as u32)
        .map(|id| match id {
            PAD_ID => "tag:<pad>".to_string(),
            UNKNOWN_ID => "tag:<unk>".to_string(),
            _ => format!("tag:{}", vocab.name(id).unwrap_or_default()),
        })
        .collect()
}

/// One window dump row: `url TAB pad TAB ids comma-joined`.
pub fn window_row(url: &str, seq: &TagSequence) -> String {
    let ids: Vec<String> = seq.ids.iter().map(u32::to_string).collect();
    format!("{url}\t{}\t{}", seq.pad, ids.join(","))
}
