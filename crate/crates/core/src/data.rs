//! Resources compiled into the binary.

/// Labelled topic sentences used to train the six category models.
pub const TOPIC_CORPUS: &str = include_str!("../data/topics.tsv");
/// Labelled spam/ham messages used to train the spam model.
pub const SPAM_CORPUS: &str = include_str!("../data/spam.tsv");
/// The 182 General Inquirer category names in column order.
pub const GI_CATEGORIES: &str = include_str!("../data/gi_categories.txt");
/// Familiar-word list used by the Dale-Chall formula.
pub const FAMILIAR_WORDS: &str = include_str!("../data/familiar_words.txt");
/// Abbreviations that do not terminate a sentence.
pub const ENGLISH_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

/// Iterates the non-empty, non-comment lines of a bundled resource.
pub fn lines(resource: &str) -> impl Iterator<Item = &str> {
    resource
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Parses a bundled `label<TAB>text` corpus.
pub fn labelled_rows(resource: &str) -> Vec<(&str, &str)> {
    lines(resource)
        .filter_map(|l| l.split_once('\t'))
        .map(|(label, text)| (label.trim(), text.trim()))
        .collect()
}
