//! Lexicon lookups: category memberships, valence and social markers.

use std::collections::HashMap;

use super::FeatureError;
use crate::data;
use crate::text::words;

/// Default social-tag markers, in schema order.
pub const DEFAULT_SOCIAL_MARKERS: [&str; 8] =
    ["facebook", "twitter", "share", "like", "follow", "tweet", "instagram", "whatsapp"];

/// Number of category columns in the General Inquirer vector.
pub const GI_WIDTH: usize = 182;

/// A token lexicon. Category tables map tokens to category indices in
/// `category_order`; valence tables map tokens to real scores. Lookups are
/// case-folded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LexiconTable {
    pub name: String,
    pub category_order: Vec<String>,
    memberships: HashMap<String, Vec<usize>>,
    valence: HashMap<String, f64>,
}

fn rows<'a>(name: &'a str, text: &'a str) -> impl Iterator<Item = Result<(usize, &'a str, &'a str), FeatureError>> + 'a {
    text.lines().enumerate().filter_map(move |(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        Some(match line.split_once('\t') {
            Some((k, v)) => Ok((i + 1, k.trim(), v.trim())),
            None => Err(FeatureError::TableFormat {
                table: name.to_string(),
                line: i + 1,
                reason: "expected token<TAB>value".into(),
            }),
        })
    })
}

impl LexiconTable {
    /// Parses `token TAB category[,category…]` lines against a fixed
    /// category order; unknown category names are a format error.
    pub fn categories(name: &str, text: &str, order: Vec<String>) -> Result<Self, FeatureError> {
        let index: HashMap<&str, usize> = order.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let mut memberships: HashMap<String, Vec<usize>> = HashMap::new();
        for row in rows(name, text) {
            let (line, token, cats) = row?;
            let entry = memberships.entry(token.to_lowercase()).or_default();
            for c in cats.split(',').map(str::trim).filter(|c| !c.is_empty()) {
                let &i = index.get(c).ok_or_else(|| FeatureError::TableFormat {
                    table: name.to_string(),
                    line,
                    reason: format!("unknown category {c:?}"),
                })?;
                if !entry.contains(&i) {
                    entry.push(i);
                }
            }
        }
        Ok(LexiconTable {
            name: name.to_string(),
            category_order: order,
            memberships,
            valence: HashMap::new(),
        })
    }

    /// A General Inquirer membership table over the bundled 182 categories.
    pub fn general_inquirer(text: &str) -> Result<Self, FeatureError> {
        let order: Vec<String> = data::lines(data::GI_CATEGORIES).map(str::to_string).collect();
        if order.len() != GI_WIDTH {
            return Err(FeatureError::LexiconShape {
                name: "gi".into(),
                found: order.len(),
                expected: GI_WIDTH,
            });
        }
        Self::categories("gi", text, order)
    }

    /// Parses `token TAB valence` lines.
    pub fn valence(name: &str, text: &str) -> Result<Self, FeatureError> {
        let mut valence = HashMap::new();
        for row in rows(name, text) {
            let (line, token, v) = row?;
            let v: f64 = v.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| FeatureError::TableFormat {
                table: name.to_string(),
                line,
                reason: format!("bad valence {v:?}"),
            })?;
            valence.insert(token.to_lowercase(), v);
        }
        Ok(LexiconTable {
            name: name.to_string(),
            valence,
            ..Self::default()
        })
    }

    pub fn categories_of(&self, token: &str) -> &[usize] {
        self.memberships.get(&token.to_lowercase()).map_or(&[], Vec::as_slice)
    }

    pub fn valence_of(&self, token: &str) -> Option<f64> {
        self.valence.get(&token.to_lowercase()).copied()
    }
}

/// Share of tokens in each category; a token in several categories counts
/// toward each. Zeros for empty text.
pub fn gi_vector(body_text: &str, gi: &LexiconTable) -> Vec<f64> {
    let mut out = vec![0.0; gi.category_order.len()];
    let tokens = words(body_text);
    if tokens.is_empty() {
        return out;
    }
    for t in &tokens {
        for &c in gi.categories_of(t) {
            out[c] += 1.0;
        }
    }
    let n = tokens.len() as f64;
    out.iter_mut().for_each(|v| *v /= n);
    out
}

/// `[positive share, negative share, neutral share, mean valence]` over
/// lexicon hits; `[0, 0, 1, 0]` without hits.
pub fn sentiment_vector(body_text: &str, valence: &LexiconTable) -> [f64; 4] {
    let hits: Vec<f64> = words(body_text).iter().filter_map(|t| valence.valence_of(t)).collect();
    if hits.is_empty() {
        return [0.0, 0.0, 1.0, 0.0];
    }
    let n = hits.len() as f64;
    let share = |f: &dyn Fn(f64) -> bool| hits.iter().filter(|&&v| f(v)).count() as f64 / n;
    [
        share(&|v| v > 0.0),
        share(&|v| v < 0.0),
        share(&|v| v == 0.0),
        hits.iter().sum::<f64>() / n,
    ]
}

/// Case-insensitive token frequency of each marker, in marker order.
pub fn social_tag_counts<S: AsRef<str>>(body_text: &str, markers: &[S]) -> Vec<f64> {
    let mut freq: HashMap<String, f64> = HashMap::new();
    for t in words(body_text) {
        *freq.entry(t).or_default() += 1.0;
    }
    markers
        .iter()
        .map(|m| freq.get(&m.as_ref().to_lowercase()).copied().unwrap_or(0.0))
        .collect()
}
