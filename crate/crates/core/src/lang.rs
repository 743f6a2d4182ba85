//! Per-language word lists shipped with the crate.

use std::collections::HashSet;

const STOPWORDS_EN: &str = include_str!("../data/stopwords/en.txt");
const STOPWORDS_FR: &str = include_str!("../data/stopwords/fr.txt");
const STOPWORDS_BG: &str = include_str!("../data/stopwords/bg.txt");
const STOPWORDS_ZH: &str = include_str!("../data/stopwords/zh.txt");

const ABBREV_EN: &str = include_str!("../data/abbrev/en.txt");
const ABBREV_FR: &str = include_str!("../data/abbrev/fr.txt");
const ABBREV_BG: &str = include_str!("../data/abbrev/bg.txt");
const ABBREV_ZH: &str = include_str!("../data/abbrev/zh.txt");

/// Words kept in the dynamic cache even though they are stopwords: pronouns
/// and the past-tense auxiliaries.
pub const RETAINED_EXCEPTIONS: &[&str] = &[
    "was", "were", "he", "she", "it", "they", "his", "her", "its", "their", "i", "we", "you",
];

/// Category keywords that mark a biography.
pub const BIOGRAPHY_KEYWORDS: &[&str] = &[
    "person",
    "writer",
    "politician",
    "player",
    "actor",
    "singer",
    "births",
    "deaths",
];

fn parse_list(data: &str) -> HashSet<String> {
    data.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("# "))
        .map(str::to_string)
        .collect()
}

/// Stopword list for `lang`; unknown languages get an empty list.
pub fn stopwords(lang: &str) -> HashSet<String> {
    match lang {
        "en" => parse_list(STOPWORDS_EN),
        "fr" => parse_list(STOPWORDS_FR),
        "bg" => parse_list(STOPWORDS_BG),
        "zh" => parse_list(STOPWORDS_ZH),
        _ => HashSet::new(),
    }
}

/// Lowercased period-final abbreviations for the sentence splitter.
pub fn abbreviations(lang: &str) -> HashSet<String> {
    match lang {
        "en" => parse_list(ABBREV_EN),
        "fr" => parse_list(ABBREV_FR),
        "bg" => parse_list(ABBREV_BG),
        "zh" => parse_list(ABBREV_ZH),
        _ => HashSet::new(),
    }
}

pub fn retained_exceptions() -> HashSet<String> {
    RETAINED_EXCEPTIONS.iter().map(|s| s.to_string()).collect()
}

/// True if every character is punctuation or a symbol.
pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_load() {
        let en = stopwords("en");
        assert!(en.contains("the"));
        assert!(en.contains("#") == false);
        assert!(en.contains("."));
        assert!(stopwords("xx").is_empty());
        assert!(abbreviations("en").contains("dr."));
        assert!(abbreviations("zh").is_empty());
    }

    #[test]
    fn punctuation() {
        assert!(is_punctuation("«"));
        assert!(is_punctuation("..."));
        assert!(!is_punctuation("3.5"));
        assert!(!is_punctuation(""));
    }
}
