use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

use super::{tokenize_13a, BleuStats};

/// Which system the reported p-value treats as the better one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// System A beats B on the full test set; p tests A > B.
    AOverB,
    /// A does not beat B; p tests B ≥ A with the roles swapped.
    BOverA,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Significance {
    pub p_value: f64,
    pub orientation: Orientation,
    pub bleu_a: f64,
    pub bleu_b: f64,
    pub n_resamples: usize,
}

impl Significance {
    pub fn to_kv(&self) -> String {
        let orientation = match self.orientation {
            Orientation::AOverB => "a>b",
            Orientation::BOverA => "b>=a",
        };
        format!(
            "bleu_a: {:.4}\nbleu_b: {:.4}\norientation: {}\nresamples: {}\np_value: {:.6}\n",
            self.bleu_a, self.bleu_b, orientation, self.n_resamples, self.p_value
        )
    }
}

/// Sentence index samples with replacement; resample `r` draws from its own
/// stream derived from `(seed, r)`.
pub fn resample_indices(n: usize, n_resamples: usize, seed: u64) -> Vec<Vec<usize>> {
    (0..n_resamples)
        .map(|r| {
            let mut rng = seed::rng_for(seed, r as u64);
            (0..n).map(|_| rng.random_range(0..n)).collect()
        })
        .collect()
}

fn sum_bleu(stats: &[BleuStats], idx: impl Iterator<Item = usize>) -> f64 {
    let mut total = BleuStats::default();
    for i in idx {
        total += &stats[i];
    }
    total.report().score
}

/// Paired bootstrap over explicit resamples.
///
/// The p-value is the fraction of resamples in which the system that wins on
/// the full set does not win (difference ≤ 0).
pub fn paired_bootstrap_with_indices(
    stats_a: &[BleuStats],
    stats_b: &[BleuStats],
    resamples: &[Vec<usize>],
) -> Significance {
    let bleu_a = sum_bleu(stats_a, 0..stats_a.len());
    let bleu_b = sum_bleu(stats_b, 0..stats_b.len());
    let orientation = if bleu_a - bleu_b > 0.0 {
        Orientation::AOverB
    } else {
        Orientation::BOverA
    };
    let failures = resamples
        .iter()
        .filter(|idx| {
            let a = sum_bleu(stats_a, idx.iter().copied());
            let b = sum_bleu(stats_b, idx.iter().copied());
            let delta = match orientation {
                Orientation::AOverB => a - b,
                Orientation::BOverA => b - a,
            };
            delta <= 0.0
        })
        .count();
    Significance {
        p_value: failures as f64 / resamples.len().max(1) as f64,
        orientation,
        bleu_a,
        bleu_b,
        n_resamples: resamples.len(),
    }
}

/// One-sided paired bootstrap test of corpus BLEU for systems A and B.
pub fn bootstrap_significance<S: AsRef<str>>(
    hyps_a: &[S],
    hyps_b: &[S],
    refs: &[S],
    n_resamples: usize,
    seed: u64,
) -> Result<Significance> {
    if hyps_a.len() != refs.len() || hyps_b.len() != refs.len() {
        return Err(Error::input("systems and references must have equal length"));
    }
    if refs.is_empty() {
        return Err(Error::input("empty test set"));
    }
    if n_resamples < 100 {
        return Err(Error::config("at least 100 bootstrap resamples are required"));
    }
    let tok = |s: &S| tokenize_13a(s.as_ref());
    let refs_t: Vec<Vec<String>> = refs.iter().map(tok).collect();
    let stats = |hyps: &[S]| -> Vec<BleuStats> {
        hyps.iter()
            .zip(&refs_t)
            .map(|(h, r)| BleuStats::from_tokens(&tok(h), r))
            .collect()
    };
    let stats_a = stats(hyps_a);
    let stats_b = stats(hyps_b);
    let resamples = resample_indices(refs.len(), n_resamples, seed);
    Ok(paired_bootstrap_with_indices(&stats_a, &stats_b, &resamples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_systems_give_p_one() {
        let h = ["a b c d e", "f g h i j", "k l m n o"];
        let r = ["a b c d e", "f g x i j", "k l m n p"];
        let s = bootstrap_significance(&h, &h, &r, 200, 1).unwrap();
        assert_eq!(s.p_value, 1.0);
        assert_eq!(s.orientation, Orientation::BOverA);
    }

    #[test]
    fn resample_determinism() {
        assert_eq!(resample_indices(10, 5, 3), resample_indices(10, 5, 3));
        assert_ne!(resample_indices(10, 5, 3), resample_indices(10, 5, 4));
    }

    #[test]
    fn reversed_orientation() {
        let refs = ["one two three four five"; 30];
        let good = ["one two three four five"; 30];
        let bad = ["six seven eight nine ten"; 30];
        let s = bootstrap_significance(&bad, &good, &refs, 100, 9).unwrap();
        assert_eq!(s.orientation, Orientation::BOverA);
        assert_eq!(s.p_value, 0.0);
    }

    #[test]
    fn too_few_resamples() {
        let h = ["a"];
        assert!(bootstrap_significance(&h, &h, &h, 10, 0).is_err());
    }
}
