//! Bag-of-words Naive Bayes text scorers: topic categories and spam.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use super::summarize::Summarizer;
use super::FeatureError;
use crate::data;
use crate::ingest::ParsedPage;
use crate::learn::{train_multinomial_nb, MultinomialNb};
use crate::text::words;

/// Topic categories in output order.
pub const CATEGORIES: [&str; 6] = ["business", "entertainment", "politics", "religion", "sports", "tech"];

/// Probability that a text belongs to the positive class.
pub trait BinaryTextScorer: Sync {
    fn probability(&self, text: &str) -> f64;
}

/// Per-category probabilities in [`CATEGORIES`] order.
pub trait CategoryScorer: Sync {
    fn probabilities(&self, text: &str) -> [f64; 6];
}

/// Token vocabulary shared by one or more count-based models.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    ids: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn build<S: AsRef<str>>(texts: &[S]) -> Self {
        let mut ids = BTreeMap::new();
        for t in texts {
            for w in words(t.as_ref()) {
                ids.entry(w).or_insert(0);
            }
        }
        for (i, v) in ids.values_mut().enumerate() {
            *v = i;
        }
        Vocabulary { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Token counts over the vocabulary and the number of words seen
    /// (known or not).
    pub fn counts(&self, text: &str) -> (Vec<f64>, usize) {
        let mut v = vec![0.0; self.ids.len()];
        let ws = words(text);
        for w in &ws {
            if let Some(&i) = self.ids.get(w) {
                v[i] += 1.0;
            }
        }
        (v, ws.len())
    }
}

/// A binary multinomial NB over a token vocabulary; class 1 is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TextNb {
    pub vocab: Vocabulary,
    pub model: MultinomialNb,
}

impl TextNb {
    pub fn train<S: AsRef<str>>(texts: &[S], positive: &[bool], alpha: f64) -> Result<Self, FeatureError> {
        let vocab = Vocabulary::build(texts);
        Self::train_with(vocab, texts, positive, alpha)
    }

    fn train_with<S: AsRef<str>>(vocab: Vocabulary, texts: &[S], positive: &[bool], alpha: f64) -> Result<Self, FeatureError> {
        let x: Vec<Vec<f64>> = texts.iter().map(|t| vocab.counts(t.as_ref()).0).collect();
        let y: Vec<usize> = positive.iter().map(|&p| p as usize).collect();
        let model = train_multinomial_nb(&x, &y, 2, alpha)?;
        Ok(TextNb { vocab, model })
    }

    /// The bundled spam/ham model (positive = spam), α = 1.
    pub fn spam() -> &'static TextNb {
        static SPAM: LazyLock<TextNb> = LazyLock::new(|| {
            let rows = data::labelled_rows(data::SPAM_CORPUS);
            let texts: Vec<&str> = rows.iter().map(|r| r.1).collect();
            let labels: Vec<bool> = rows.iter().map(|r| r.0 == "spam").collect();
            TextNb::train(&texts, &labels, 1.0).expect("bundled spam corpus is valid")
        });
        &SPAM
    }
}

impl BinaryTextScorer for TextNb {
    /// 0.5 for text without words.
    fn probability(&self, text: &str) -> f64 {
        let (x, n) = self.vocab.counts(text);
        if n == 0 {
            return 0.5;
        }
        self.model.predict_proba(&x)[1]
    }
}

/// Six one-vs-rest topic models over a shared vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryModelSet {
    pub vocab: Vocabulary,
    pub models: Vec<MultinomialNb>,
}

impl CategoryModelSet {
    /// Trains from `(topic, text)` rows; every category needs at least one
    /// positive and one negative row.
    pub fn train(rows: &[(&str, &str)], alpha: f64) -> Result<Self, FeatureError> {
        let texts: Vec<&str> = rows.iter().map(|r| r.1).collect();
        let vocab = Vocabulary::build(&texts);
        let x: Vec<Vec<f64>> = texts.iter().map(|t| vocab.counts(t).0).collect();
        let models = CATEGORIES
            .iter()
            .map(|cat| {
                let y: Vec<usize> = rows.iter().map(|r| (r.0 == *cat) as usize).collect();
                train_multinomial_nb(&x, &y, 2, alpha)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CategoryModelSet { vocab, models })
    }

    /// Models trained on the bundled topic corpus with α = 1.
    pub fn bundled() -> &'static CategoryModelSet {
        static SET: LazyLock<CategoryModelSet> = LazyLock::new(|| {
            CategoryModelSet::train(&data::labelled_rows(data::TOPIC_CORPUS), 1.0)
                .expect("bundled topic corpus is valid")
        });
        &SET
    }
}

impl CategoryScorer for CategoryModelSet {
    fn probabilities(&self, text: &str) -> [f64; 6] {
        let (x, n) = self.vocab.counts(text);
        if n == 0 {
            return [0.5; 6];
        }
        let mut out = [0.0; 6];
        for (o, m) in out.iter_mut().zip(&self.models) {
            *o = m.predict_proba(&x)[1];
        }
        out
    }
}

fn mean_over<'a, I: Iterator<Item = &'a str>>(texts: I, models: &dyn CategoryScorer) -> [f64; 6] {
    let mut sum = [0.0; 6];
    let mut n = 0usize;
    for t in texts {
        for (s, p) in sum.iter_mut().zip(models.probabilities(t)) {
            *s += p;
        }
        n += 1;
    }
    if n == 0 {
        return [0.5; 6];
    }
    sum.map(|s| s / n as f64)
}

fn with_title(first: [f64; 6], page: &ParsedPage, models: &dyn CategoryScorer) -> [f64; 12] {
    let title = if page.title.trim().is_empty() {
        [0.5; 6]
    } else {
        models.probabilities(&page.title)
    };
    let mut out = [0.0; 12];
    out[..6].copy_from_slice(&first);
    out[6..].copy_from_slice(&title);
    out
}

/// Sentence-averaged category probabilities followed by the title's.
pub fn category_vector(page: &ParsedPage, models: &dyn CategoryScorer) -> [f64; 12] {
    let first = mean_over(page.sentences.iter().map(String::as_str), models);
    with_title(first, page, models)
}

/// As [`category_vector`], averaging only over the summarizer's top `n`
/// sentences.
pub fn category_vector_summarized(
    page: &ParsedPage,
    models: &dyn CategoryScorer,
    summarizer: Summarizer,
    n: usize,
) -> [f64; 12] {
    let top = summarizer.top(&page.sentences, n);
    let first = mean_over(top.iter().map(|&i| page.sentences[i].as_str()), models);
    with_title(first, page, models)
}

/// `[P(spam | body), P(spam | title)]`.
pub fn spam_flags(page: &ParsedPage, spam: &dyn BinaryTextScorer) -> [f64; 2] {
    [spam.probability(&page.body_text), spam.probability(&page.title)]
}
