use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::Sentence;
use crate::eval::sentence_bleu_smoothed;

/// Similarity in [0, 1] between a span of source sentences and a span of
/// target sentences.
pub trait Similarity {
    fn similarity(&self, src: &[Sentence], tgt: &[Sentence]) -> f64;
}

impl<F> Similarity for F
where
    F: Fn(&[Sentence], &[Sentence]) -> f64,
{
    fn similarity(&self, src: &[Sentence], tgt: &[Sentence]) -> f64 {
        self(src, tgt)
    }
}

/// Add-one smoothed sentence BLEU of the concatenated source tokens against
/// the concatenated target tokens.
#[derive(Debug, Clone, Copy, Default)]
pub struct BleuSimilarity;

impl Similarity for BleuSimilarity {
    fn similarity(&self, src: &[Sentence], tgt: &[Sentence]) -> f64 {
        let s: Vec<&str> = src.iter().flat_map(|x| x.tokens.iter().map(String::as_str)).collect();
        let t: Vec<&str> = tgt.iter().flat_map(|x| x.tokens.iter().map(String::as_str)).collect();
        sentence_bleu_smoothed(&s, &t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignConfig {
    /// Cost of leaving one sentence unaligned.
    pub skip_penalty: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig { skip_penalty: 0.15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BeadKind {
    OneOne,
    TwoOne,
    OneTwo,
    OneZero,
    ZeroOne,
}

impl BeadKind {
    /// Tie order: earlier kinds win equal-score comparisons.
    pub const ALL: [BeadKind; 5] = [
        BeadKind::OneOne,
        BeadKind::TwoOne,
        BeadKind::OneTwo,
        BeadKind::OneZero,
        BeadKind::ZeroOne,
    ];

    pub fn sizes(self) -> (usize, usize) {
        match self {
            BeadKind::OneOne => (1, 1),
            BeadKind::TwoOne => (2, 1),
            BeadKind::OneTwo => (1, 2),
            BeadKind::OneZero => (1, 0),
            BeadKind::ZeroOne => (0, 1),
        }
    }

    pub fn from_sizes(src: usize, tgt: usize) -> Option<BeadKind> {
        BeadKind::ALL.into_iter().find(|k| k.sizes() == (src, tgt))
    }

    pub fn is_skip(self) -> bool {
        matches!(self, BeadKind::OneZero | BeadKind::ZeroOne)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentBead {
    pub src_span: Range<usize>,
    pub tgt_span: Range<usize>,
    /// Similarity of the aligned spans; 0 for skip beads.
    pub score: f64,
}

impl AlignmentBead {
    pub fn kind(&self) -> BeadKind {
        BeadKind::from_sizes(self.src_span.len(), self.tgt_span.len()).expect("bead sizes are restricted")
    }
}

fn clamp01(x: f64) -> f64 {
    if x.is_finite() {
        x.clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Maximum-score monotone alignment over 1-1, 2-1, 1-2, 1-0 and 0-1 beads.
///
/// Matching beads contribute their similarity; skip beads contribute
/// `-skip_penalty`. Every sentence on both sides is covered exactly once.
pub fn align_sentences<S: Similarity + ?Sized>(
    src: &[Sentence],
    tgt: &[Sentence],
    sim: &S,
    cfg: &AlignConfig,
) -> Vec<AlignmentBead> {
    let (n, m) = (src.len(), tgt.len());
    let width = m + 1;
    let mut best = vec![f64::NEG_INFINITY; (n + 1) * width];
    let mut back: Vec<Option<(BeadKind, f64)>> = vec![None; (n + 1) * width];
    best[0] = 0.0;
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut cell = f64::NEG_INFINITY;
            let mut choice = None;
            for kind in BeadKind::ALL {
                let (di, dj) = kind.sizes();
                if di > i || dj > j {
                    continue;
                }
                let prev = best[(i - di) * width + (j - dj)];
                if prev == f64::NEG_INFINITY {
                    continue;
                }
                let bead_score = if kind.is_skip() {
                    0.0
                } else {
                    clamp01(sim.similarity(&src[i - di..i], &tgt[j - dj..j]))
                };
                let gain = if kind.is_skip() { -cfg.skip_penalty } else { bead_score };
                if prev + gain > cell {
                    cell = prev + gain;
                    choice = Some((kind, bead_score));
                }
            }
            best[i * width + j] = cell;
            back[i * width + j] = choice;
        }
    }

    let mut beads = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let (kind, score) = back[i * width + j].expect("every cell is reachable");
        let (di, dj) = kind.sizes();
        beads.push(AlignmentBead {
            src_span: i - di..i,
            tgt_span: j - dj..j,
            score,
        });
        i -= di;
        j -= dj;
    }
    beads.reverse();
    beads
}

/// Sum of the objective over `beads`.
pub fn total_score(beads: &[AlignmentBead], cfg: &AlignConfig) -> f64 {
    beads
        .iter()
        .map(|b| if b.kind().is_skip() { -cfg.skip_penalty } else { b.score })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sents(texts: &[&str]) -> Vec<Sentence> {
        texts.iter().enumerate().map(|(i, t)| Sentence::new(*t, "d", 0, i)).collect()
    }

    fn identity(src: &[Sentence], tgt: &[Sentence]) -> f64 {
        if src.len() == 1 && tgt.len() == 1 && src[0].text == tgt[0].text {
            1.0
        } else {
            0.0
        }
    }

    #[test]
    fn identical_lists_align_diagonally() {
        let s = sents(&["a .", "b .", "c .", "d .", "e ."]);
        let beads = align_sentences(&s, &s, &identity, &AlignConfig::default());
        assert_eq!(beads.len(), 5);
        for (k, b) in beads.iter().enumerate() {
            assert_eq!(b.src_span, k..k + 1);
            assert_eq!(b.tgt_span, k..k + 1);
            assert_eq!(b.score, 1.0);
        }
    }

    #[test]
    fn empty_target_is_all_skips() {
        let s = sents(&["a", "b", "c"]);
        let beads = align_sentences(&s, &[], &BleuSimilarity, &AlignConfig::default());
        assert_eq!(beads.len(), 3);
        assert!(beads.iter().all(|b| b.kind() == BeadKind::OneZero && b.score == 0.0));
        let beads = align_sentences(&[], &s, &BleuSimilarity, &AlignConfig::default());
        assert!(beads.iter().all(|b| b.kind() == BeadKind::ZeroOne));
        assert!(align_sentences(&[], &[], &BleuSimilarity, &AlignConfig::default()).is_empty());
    }

    #[test]
    fn bleu_similarity_recovers_merge() {
        let src = sents(&["the singer was born in paris .", "she moved to lyon in 1990 and studied music there ."]);
        let tgt = sents(&["the singer was born in paris . she moved to lyon in 1990 and studied music there ."]);
        let beads = align_sentences(&src, &tgt, &BleuSimilarity, &AlignConfig::default());
        assert_eq!(beads.len(), 1);
        assert_eq!(beads[0].kind(), BeadKind::TwoOne);
    }
}
