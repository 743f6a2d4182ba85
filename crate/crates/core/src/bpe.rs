//! Byte-pair-encoding subword merges.
//!
//! Merges operate on the characters of a word. The continuation marker (`@@`
//! by default) is appended at output time to every subword except the last,
//! so the table itself needs no end-of-word symbol.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

pub const DEFAULT_MARKER: &str = "@@";

/// Special tokens such as `<topic64>` or `<bos>` that are never segmented.
pub fn is_protected(token: &str) -> bool {
    token.len() > 2
        && token.starts_with('<')
        && token.ends_with('>')
        && token[1..token.len() - 1].chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeTable {
    merges: Vec<(String, String)>,
    ranks: HashMap<(String, String), usize>,
    marker: String,
}

impl Default for MergeTable {
    fn default() -> Self {
        MergeTable::new(Vec::new()).expect("empty table is valid")
    }
}

impl MergeTable {
    /// Builds a table from merges in priority order.
    pub fn new(merges: Vec<(String, String)>) -> Result<Self> {
        Self::with_marker(merges, DEFAULT_MARKER)
    }

    pub fn with_marker(merges: Vec<(String, String)>, marker: &str) -> Result<Self> {
        let mut ranks = HashMap::with_capacity(merges.len());
        for (rank, pair) in merges.iter().enumerate() {
            if pair.0.is_empty() || pair.1.is_empty() {
                return Err(Error::input("merge with empty side"));
            }
            if ranks.insert(pair.clone(), rank).is_some() {
                return Err(Error::input(format!("duplicate merge {} {}", pair.0, pair.1)));
            }
        }
        Ok(MergeTable {
            merges,
            ranks,
            marker: marker.to_string(),
        })
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn marker(&self) -> &str {
        &self.marker
    }

    pub fn len(&self) -> usize {
        self.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    /// `version 1`, `config <hash>`, then one `left right` pair per line.
    pub fn to_text(&self, config_hash: &str) -> String {
        let mut out = format!("version 1\nconfig {config_hash}\n");
        for (l, r) in &self.merges {
            out.push_str(l);
            out.push(' ');
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, label: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some("version 1") {
            return Err(Error::format(label, 1, "expected header `version 1`"));
        }
        match lines.next() {
            Some(l) if l.starts_with("config ") => {}
            _ => return Err(Error::format(label, 2, "expected `config <hash>`")),
        }
        let mut merges = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => merges.push((l.to_string(), r.to_string())),
                _ => return Err(Error::format(label, i + 3, "expected `left right`")),
            }
        }
        MergeTable::new(merges).map_err(|e| Error::format(label, 0, e.to_string()))
    }

    /// Segments one word. Protected tokens come back whole.
    pub fn apply(&self, word: &str) -> Vec<String> {
        if word.is_empty() {
            return Vec::new();
        }
        if is_protected(word) {
            return vec![word.to_string()];
        }
        let mut symbols: Vec<String> = word.chars().map(String::from).collect();
        loop {
            let best = symbols
                .windows(2)
                .filter_map(|w| self.ranks.get(&(w[0].clone(), w[1].clone())).copied())
                .min();
            let Some(rank) = best else { break };
            let (l, r) = &self.merges[rank];
            symbols = merge_pair(&symbols, l, r);
        }
        let last = symbols.len() - 1;
        for s in &mut symbols[..last] {
            s.push_str(&self.marker);
        }
        symbols
    }

    /// Segments whitespace-separated tokens.
    pub fn apply_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        tokens.iter().flat_map(|t| self.apply(t.as_ref())).collect()
    }
}

fn merge_pair(symbols: &[String], left: &str, right: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && symbols[i] == left && symbols[i + 1] == right {
            out.push(format!("{left}{right}"));
            i += 2;
        } else {
            out.push(symbols[i].clone());
            i += 1;
        }
    }
    out
}

/// Learns up to `num_merges` merges from a weighted word list.
///
/// Each step merges the adjacent symbol pair with the highest weighted count;
/// ties go to the lexicographically smallest `(left, right)`. Learning stops
/// early once no pair occurs at least twice.
pub fn learn_bpe(vocab: &BTreeMap<String, u64>, num_merges: usize) -> Result<MergeTable> {
    if let Some(w) = vocab.keys().find(|w| w.chars().any(char::is_whitespace)) {
        return Err(Error::input(format!("word {w:?} contains whitespace")));
    }
    let mut words: Vec<(Vec<String>, u64)> = vocab
        .iter()
        .filter(|(w, &c)| c > 0 && !w.is_empty() && !is_protected(w))
        .map(|(w, &c)| (w.chars().map(String::from).collect(), c))
        .collect();
    let mut merges = Vec::new();
    while merges.len() < num_merges {
        let mut counts: HashMap<(&str, &str), u64> = HashMap::new();
        for (syms, c) in &words {
            for w in syms.windows(2) {
                *counts.entry((w[0].as_str(), w[1].as_str())).or_insert(0) += c;
            }
        }
        let best = counts
            .into_iter()
            .filter(|&(_, c)| c >= 2)
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
        let Some(((l, r), _)) = best else { break };
        let (l, r) = (l.to_string(), r.to_string());
        for (syms, _) in &mut words {
            if syms.windows(2).any(|w| w[0] == l && w[1] == r) {
                *syms = merge_pair(syms, &l, &r);
            }
        }
        merges.push((l, r));
    }
    MergeTable::new(merges)
}

/// Segments `word` with `table`.
pub fn apply_bpe(word: &str, table: &MergeTable) -> Vec<String> {
    table.apply(word)
}

/// Rejoins the subwords of one word, removing the continuation marker from
/// every piece but the last.
pub fn undo_bpe<S: AsRef<str>>(subwords: &[S]) -> String {
    undo_bpe_with(subwords, DEFAULT_MARKER)
}

pub fn undo_bpe_with<S: AsRef<str>>(subwords: &[S], marker: &str) -> String {
    let mut out = String::new();
    let n = subwords.len();
    for (i, s) in subwords.iter().enumerate() {
        let s = s.as_ref();
        if i + 1 < n {
            out.push_str(s.strip_suffix(marker).unwrap_or(s));
        } else {
            out.push_str(s);
        }
    }
    out
}

/// Rejoins a segmented token sequence into whitespace-separated words.
pub fn undo_bpe_tokens<S: AsRef<str>>(tokens: &[S], marker: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut cur = String::new();
    for t in tokens {
        let t = t.as_ref();
        match t.strip_suffix(marker) {
            Some(stem) if !is_protected(t) => cur.push_str(stem),
            _ => {
                cur.push_str(t);
                words.push(std::mem::take(&mut cur));
            }
        }
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words
}
