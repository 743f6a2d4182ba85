use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

/// Which target topic a training unit is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicSource {
    /// Topic inferred from the reference target text.
    Gold,
    /// Source topic projected through the topic alignment.
    Projected,
}

/// Assigns exactly `round(ratio · n)` units the gold topic, chosen by a
/// seeded shuffle.
pub fn topic_schedule(n_units: usize, ratio: f64, seed: u64) -> Result<Vec<TopicSource>> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::config(format!("schedule ratio {ratio} outside [0,1]")));
    }
    let n_gold = (ratio * n_units as f64).round() as usize;
    let mut flags: Vec<TopicSource> = (0..n_units)
        .map(|i| if i < n_gold { TopicSource::Gold } else { TopicSource::Projected })
        .collect();
    flags.shuffle(&mut seed::rng(seed));
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes_and_half() {
        assert!(topic_schedule(50, 1.0, 1).unwrap().iter().all(|&f| f == TopicSource::Gold));
        assert!(topic_schedule(50, 0.0, 1).unwrap().iter().all(|&f| f == TopicSource::Projected));
        let s = topic_schedule(10_000, 0.5, 9).unwrap();
        let gold = s.iter().filter(|&&f| f == TopicSource::Gold).count();
        assert!((4800..=5200).contains(&gold));
        assert_eq!(s, topic_schedule(10_000, 0.5, 9).unwrap());
        assert!(topic_schedule(3, 1.5, 0).is_err());
    }
}
