//! Classic readability formulas over visible text.

use std::collections::HashSet;
use std::sync::LazyLock;

use crate::data;
use crate::ingest::split_sentences;
use crate::text::words;

pub const READABILITY_METRICS: [&str; 8] = [
    "flesch_reading_ease",
    "flesch_kincaid_grade",
    "smog",
    "coleman_liau",
    "ari",
    "gunning_fog",
    "lix",
    "dale_chall",
];

static FAMILIAR: LazyLock<HashSet<&'static str>> = LazyLock::new(|| data::lines(data::FAMILIAR_WORDS).collect());

/// Vowel groups over `[aeiouy]`, minus a silent final `e` (but not `-le`)
/// when the word has more than one group; at least 1.
pub fn count_syllables(word: &str) -> usize {
    let w: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0;
    let mut prev = false;
    for &c in &w {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    let n = w.len();
    if groups > 1 && n >= 2 && w[n - 1] == 'e' && w[n - 2] != 'l' && !is_vowel(w[n - 2]) {
        groups -= 1;
    }
    groups.max(1)
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    words: f64,
    sentences: f64,
    syllables: f64,
    chars: f64,
    polysyllables: f64,
    long_words: f64,
    difficult: f64,
}

fn counts(text: &str) -> Counts {
    let ws = words(text);
    if ws.is_empty() {
        return Counts::default();
    }
    let mut c = Counts {
        words: ws.len() as f64,
        sentences: split_sentences(text).len().max(1) as f64,
        ..Counts::default()
    };
    for w in &ws {
        let syl = count_syllables(w);
        let len = w.chars().filter(|ch| ch.is_alphanumeric()).count();
        c.syllables += syl as f64;
        c.chars += len as f64;
        c.polysyllables += (syl >= 3) as u8 as f64;
        c.long_words += (len > 6) as u8 as f64;
        c.difficult += (!FAMILIAR.contains(w.as_str())) as u8 as f64;
    }
    c
}

/// The eight metrics in [`READABILITY_METRICS`] order; all zeros for text
/// without words.
pub fn readability_vector(text: &str) -> [f64; 8] {
    let c = counts(text);
    if c.words == 0.0 {
        return [0.0; 8];
    }
    let wps = c.words / c.sentences;
    let spw = c.syllables / c.words;
    let cpw = c.chars / c.words;
    let difficult_pct = 100.0 * c.difficult / c.words;
    let dale_chall = 0.1579 * difficult_pct + 0.0496 * wps + if difficult_pct > 5.0 { 3.6365 } else { 0.0 };
    [
        206.835 - 1.015 * wps - 84.6 * spw,
        0.39 * wps + 11.8 * spw - 15.59,
        1.0430 * (c.polysyllables * 30.0 / c.sentences).sqrt() + 3.1291,
        0.0588 * (100.0 * cpw) - 0.296 * (100.0 * c.sentences / c.words) - 15.8,
        4.71 * cpw + 0.5 * wps - 21.43,
        0.4 * (wps + 100.0 * c.polysyllables / c.words),
        wps + 100.0 * c.long_words / c.words,
        dale_chall,
    ]
}
