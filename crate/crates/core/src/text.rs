//! Word-level tokenization shared by the lexical extractors.

/// Splits text into lowercase word tokens.
///
/// A token is a maximal run of alphanumeric characters, optionally joined by
/// internal apostrophes or hyphens (`don't`, `e-mail`).
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = text.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if (c == '\'' || c == '-' || c == '\u{2019}')
            && !cur.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            cur.push(if c == '\u{2019}' { '\'' } else { c });
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Tokens that consist of letters only (used for word counts in readability).
pub fn words(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.chars().any(char::is_alphabetic))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_punctuation_and_lowercases() {
        assert_eq!(tokenize("Share on Facebook, and Twitter!"), ["share", "on", "facebook", "and", "twitter"]);
        assert_eq!(tokenize("don't e-mail 'quoted'"), ["don't", "e-mail", "quoted"]);
        assert!(tokenize("  ...  ").is_empty());
    }

    #[test]
    fn words_drop_pure_numbers() {
        assert_eq!(words("In 2024 we 3x"), ["in", "we", "3x"]);
    }
}
