use super::Document;
use crate::lang::BIOGRAPHY_KEYWORDS;

pub fn default_biography_keywords() -> Vec<String> {
    BIOGRAPHY_KEYWORDS.iter().map(|s| s.to_string()).collect()
}

/// True if a category contains one of `keywords` (case-insensitive substring)
/// or a section is headed "Biography".
pub fn is_biography<S: AsRef<str>>(doc: &Document, keywords: &[S]) -> bool {
    let keywords: Vec<String> = keywords.iter().map(|k| k.as_ref().to_lowercase()).collect();
    let by_category = doc.categories.iter().any(|c| {
        let c = c.to_lowercase();
        keywords.iter().any(|k| !k.is_empty() && c.contains(k.as_str()))
    });
    by_category || doc.sections.iter().any(|s| s.heading.trim().to_lowercase() == "biography")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_wikitext_lite;

    fn doc(categories: &[&str], raw: &str) -> Document {
        let mut d = parse_wikitext_lite(raw, "d", "en");
        d.categories = categories.iter().map(|s| s.to_string()).collect();
        d
    }

    #[test]
    fn category_keyword() {
        assert!(is_biography(&doc(&["French writers"], "x."), &["writer"]));
        assert!(is_biography(&doc(&["1894 BIRTHS"], "x."), &default_biography_keywords()));
    }

    #[test]
    fn not_a_biography() {
        assert!(!is_biography(&doc(&["Rivers of Spain"], "x. == Course == y."), &default_biography_keywords()));
    }

    #[test]
    fn biography_section() {
        let d = doc(&[], "== Early life ==\nBorn. == Biography ==\nLived.");
        assert!(is_biography(&d, &["writer"]));
    }
}
