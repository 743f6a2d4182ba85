use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::Granularity;
use crate::corpus::{Document, Section};
use crate::lang::is_punctuation;

/// Identity of a unit: a whole document, or one section of it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnitId {
    pub doc_id: String,
    pub section_index: Option<usize>,
}

impl UnitId {
    pub fn new(doc_id: &str, section_index: Option<usize>) -> Self {
        UnitId {
            doc_id: doc_id.to_string(),
            section_index,
        }
    }
}

impl std::fmt::Display for UnitId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.section_index {
            Some(s) => write!(f, "{}#{}", self.doc_id, s),
            None => f.write_str(&self.doc_id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub id: UnitId,
    /// Lowercased content words in text order.
    pub bag: Vec<String>,
}

/// Lowercases `tokens` and drops stopwords and pure punctuation.
pub fn bag_of_words<'a>(tokens: impl IntoIterator<Item = &'a String>, stopwords: &HashSet<String>) -> Vec<String> {
    tokens
        .into_iter()
        .map(|t| t.to_lowercase())
        .filter(|t| !is_punctuation(t) && !stopwords.contains(t))
        .collect()
}

fn section_bag(sec: &Section, stopwords: &HashSet<String>) -> Vec<String> {
    bag_of_words(sec.sentences.iter().flat_map(|s| s.tokens.iter()), stopwords)
}

/// All units of `docs` at `granularity`, including units with empty bags.
pub fn units_for(docs: &[Document], granularity: Granularity, stopwords: &HashSet<String>) -> Vec<Unit> {
    let mut out = Vec::new();
    for d in docs {
        match granularity {
            Granularity::Section => {
                for sec in &d.sections {
                    out.push(Unit {
                        id: UnitId::new(&d.doc_id, Some(sec.section_index)),
                        bag: section_bag(sec, stopwords),
                    });
                }
            }
            Granularity::Document => out.push(Unit {
                id: UnitId::new(&d.doc_id, None),
                bag: d.sections.iter().flat_map(|s| section_bag(s, stopwords)).collect(),
            }),
        }
    }
    out
}

/// Training units: one per section (or document), empty bags dropped.
pub fn prepare_units(docs: &[Document], granularity: Granularity, stopwords: &HashSet<String>) -> Vec<Unit> {
    units_for(docs, granularity, stopwords)
        .into_iter()
        .filter(|u| !u.bag.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_wikitext_lite;
    use crate::lang;

    #[test]
    fn section_and_document_units() {
        let d = parse_wikitext_lite("The Singer was born. == Career == She sang songs. == Death == She died in Paris.", "d", "en");
        let sw = lang::stopwords("en");
        let s = prepare_units(std::slice::from_ref(&d), Granularity::Section, &sw);
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].bag, ["singer", "born"]);
        assert_eq!(s[1].id, UnitId::new("d", Some(1)));
        let doc = prepare_units(&[d], Granularity::Document, &sw);
        assert_eq!(doc.len(), 1);
        let mut union: Vec<String> = s.iter().flat_map(|u| u.bag.clone()).collect();
        let mut whole = doc[0].bag.clone();
        union.sort();
        whole.sort();
        assert_eq!(union, whole);
    }

    #[test]
    fn empty_bags_dropped() {
        let d = parse_wikitext_lite("The. == A == It was.", "d", "en");
        assert!(prepare_units(&[d.clone()], Granularity::Section, &lang::stopwords("en")).is_empty());
        assert_eq!(units_for(&[d], Granularity::Section, &lang::stopwords("en")).len(), 2);
    }
}
