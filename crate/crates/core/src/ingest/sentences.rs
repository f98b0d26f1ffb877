//! Rule-based sentence segmentation.

use std::collections::HashSet;

use crate::data;

/// Splits text into sentences. Implementations must be total: every output
/// sentence is nonempty and sentences appear in input order.
pub trait SentenceSplitter {
    fn split(&self, text: &str) -> Vec<String>;
}

/// Splits on `.`, `!` and `?` at the end of a whitespace-delimited token,
/// unless the token is a known abbreviation.
#[derive(Debug, Clone)]
pub struct RuleBasedSplitter {
    abbreviations: HashSet<String>,
}

impl RuleBasedSplitter {
    pub fn new<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        RuleBasedSplitter {
            abbreviations: abbreviations.into_iter().map(|s| s.into().to_lowercase()).collect(),
        }
    }

    pub fn english() -> Self {
        Self::new(data::lines(data::ENGLISH_ABBREVIATIONS))
    }

    fn ends_sentence(&self, token: &str) -> bool {
        let core = token.trim_end_matches(['"', '\'', ')', ']', '\u{201d}', '\u{2019}']);
        let Some(last) = core.chars().last() else {
            return false;
        };
        match last {
            '!' | '?' => true,
            '.' => {
                let word = core
                    .trim_end_matches('.')
                    .trim_start_matches(|c: char| !c.is_alphanumeric())
                    .to_lowercase();
                !self.abbreviations.contains(&word)
            }
            _ => false,
        }
    }
}

impl SentenceSplitter for RuleBasedSplitter {
    fn split(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur: Vec<&str> = Vec::new();
        for tok in text.split_whitespace() {
            cur.push(tok);
            if self.ends_sentence(tok) {
                out.push(cur.join(" "));
                cur.clear();
            }
        }
        if !cur.is_empty() {
            out.push(cur.join(" "));
        }
        out
    }
}

static ENGLISH: std::sync::LazyLock<RuleBasedSplitter> = std::sync::LazyLock::new(RuleBasedSplitter::english);

/// Splits text with the bundled English rules.
pub fn split_sentences(text: &str) -> Vec<String> {
    ENGLISH.split(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn terminal_punctuation() {
        assert_eq!(split_sentences("A. B? C!"), ["A.", "B?", "C!"]);
    }

    #[test]
    fn empty() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   \n ").is_empty());
    }

    #[test]
    fn abbreviation_guard() {
        assert_eq!(
            split_sentences("Dr. Smith left. He returned."),
            ["Dr. Smith left.", "He returned."]
        );
        assert_eq!(split_sentences("Use tools, e.g. hammers. Fine"), ["Use tools, e.g. hammers.", "Fine"]);
    }

    #[test]
    fn trailing_quotes_and_unterminated_tail() {
        assert_eq!(split_sentences("He said \"stop.\" Then left"), ["He said \"stop.\"", "Then left"]);
    }

    proptest! {
        #[test]
        fn total_and_order_preserving(text in "[a-zA-Z .!?\n]{0,80}") {
            let sents = split_sentences(&text);
            prop_assert!(sents.iter().all(|s| !s.trim().is_empty()));
            let joined: Vec<&str> = sents.iter().flat_map(|s| s.split_whitespace()).collect();
            let original: Vec<&str> = text.split_whitespace().collect();
            prop_assert_eq!(joined, original);
        }
    }
}
