use std::collections::HashSet;

use crate::lang;

const ASCII_TERMINATORS: &[char] = &['.', '!', '?'];
const WIDE_TERMINATORS: &[char] = &['。', '！', '？'];
const CLOSERS: &[char] = &['"', '\'', '”', '’', '»', ')', ']', '」', '』', '）'];
const OPENERS: &[char] = &['"', '\'', '“', '‘', '«', '(', '[', '„'];

/// Rule-based sentence boundary detector.
///
/// A boundary follows `.`, `!` or `?` (plus any trailing terminators and
/// closing quotes/brackets) when the next character is whitespace or the end
/// of the text. Full-width `。！？` end a sentence unconditionally. A period
/// does not end a sentence when the word it closes is a listed abbreviation or
/// a single capital initial.
#[derive(Debug, Clone, Default)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
}

impl SentenceSplitter {
    pub fn new(abbreviations: HashSet<String>) -> Self {
        SentenceSplitter { abbreviations }
    }

    pub fn for_lang(lang: &str) -> Self {
        Self::new(lang::abbreviations(lang))
    }

    fn is_abbreviation(&self, word: &str) -> bool {
        let word = word.trim_start_matches(OPENERS);
        let lower = word.to_lowercase();
        if self.abbreviations.contains(&lower) {
            return true;
        }
        let mut chars = word.chars();
        matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_uppercase())
    }

    /// Splits `text` into whitespace-normalised sentences.
    pub fn split(&self, text: &str) -> Vec<String> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut out = Vec::new();
        let mut start = 0usize;
        let mut i = 0usize;
        while i < chars.len() {
            let (_, c) = chars[i];
            let wide = WIDE_TERMINATORS.contains(&c);
            if !wide && !ASCII_TERMINATORS.contains(&c) {
                i += 1;
                continue;
            }
            let mut j = i + 1;
            while j < chars.len() && (ASCII_TERMINATORS.contains(&chars[j].1) || WIDE_TERMINATORS.contains(&chars[j].1) || CLOSERS.contains(&chars[j].1)) {
                j += 1;
            }
            let at_break = j == chars.len() || chars[j].1.is_whitespace();
            if !wide && !at_break {
                i = j;
                continue;
            }
            let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
            if !wide && c == '.' && j == i + 1 {
                let seg = &text[start..end];
                let word = seg.rsplit(char::is_whitespace).next().unwrap_or(seg);
                if self.is_abbreviation(word) {
                    i = j;
                    continue;
                }
            }
            push_normalized(&mut out, &text[start..end]);
            start = end;
            i = j;
        }
        push_normalized(&mut out, &text[start..]);
        out
    }
}

fn push_normalized(out: &mut Vec<String>, piece: &str) {
    let norm = piece.split_whitespace().collect::<Vec<_>>().join(" ");
    if !norm.is_empty() {
        out.push(norm);
    }
}
