//! Appearance gallery: the encodings a track is re-identified against.

use rand::Rng;
use serde::Serialize;

use crate::geometry::{cosine_distance, Embedding};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GalleryEntry {
    pub embedding: Embedding,
    /// Tick at which the entry was stored.
    pub stamp: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Gallery {
    entries: Vec<GalleryEntry>,
}

/// Appearance cost terms of a detection against a gallery.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureCost {
    /// Smallest cosine distance to any entry.
    pub min: f64,
    /// Mean of the `n` smallest distances.
    pub avg_lowest: f64,
}

impl Gallery {
    pub fn new(first: Embedding, stamp: u64) -> Self {
        Gallery { entries: vec![GalleryEntry { embedding: first, stamp }] }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[GalleryEntry] {
        &self.entries
    }

    pub fn push(&mut self, embedding: Embedding, stamp: u64) {
        self.entries.push(GalleryEntry { embedding, stamp });
    }

    pub fn min_distance(&self, e: &Embedding) -> f64 {
        self.entries
            .iter()
            .map(|g| cosine_distance(&g.embedding, e))
            .fold(f64::INFINITY, f64::min)
    }

    /// Min and mean-of-`n`-lowest distances in one pass. A gallery smaller
    /// than `n` averages over all entries.
    pub fn feature_cost(&self, e: &Embedding, n: usize) -> FeatureCost {
        let mut lowest: Vec<f64> = Vec::with_capacity(n + 1);
        for g in &self.entries {
            let d = cosine_distance(&g.embedding, e);
            if lowest.len() < n || d < *lowest.last().unwrap() {
                let at = lowest.partition_point(|x| *x <= d);
                lowest.insert(at, d);
                lowest.truncate(n);
            }
        }
        if lowest.is_empty() {
            return FeatureCost { min: f64::INFINITY, avg_lowest: f64::INFINITY };
        }
        FeatureCost { min: lowest[0], avg_lowest: lowest.iter().sum::<f64>() / lowest.len() as f64 }
    }

    /// Drop the oldest entries until at most `keep` remain.
    pub fn keep_last(&mut self, keep: usize) {
        if self.entries.len() > keep {
            self.entries.drain(..self.entries.len() - keep);
        }
    }

    /// Keep a uniform random subset of `keep` entries, preserving order.
    pub fn downsample<R: Rng + ?Sized>(&mut self, keep: usize, rng: &mut R) {
        if self.entries.len() <= keep {
            return;
        }
        let mut picked = rand::seq::index::sample(rng, self.entries.len(), keep).into_vec();
        picked.sort_unstable();
        let old = std::mem::take(&mut self.entries);
        let mut picked = picked.into_iter().peekable();
        for (i, e) in old.into_iter().enumerate() {
            if picked.peek() == Some(&i) {
                self.entries.push(e);
                picked.next();
            }
        }
    }
}

/// Gallery length at which a downsample to `budget` is triggered: the
/// integer ceiling of `1.1 · budget`.
pub fn downsample_trigger(budget: usize) -> usize {
    (11 * budget).div_ceil(10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gallery(n: usize) -> Gallery {
        let mut g = Gallery::default();
        for i in 0..n {
            g.push(Embedding::basis(n, i), i as u64);
        }
        g
    }

    #[test]
    fn trigger_is_ten_percent_over_budget() {
        assert_eq!(downsample_trigger(120), 132);
        assert_eq!(downsample_trigger(10), 11);
        assert_eq!(downsample_trigger(1), 2);
    }

    #[test]
    fn downsample_keeps_budget_and_order() {
        let mut g = gallery(132);
        g.downsample(120, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(g.len(), 120);
        assert!(g.entries().windows(2).all(|w| w[0].stamp < w[1].stamp));
    }

    #[test]
    fn downsample_is_seeded() {
        let mut a = gallery(132);
        let mut b = gallery(132);
        a.downsample(120, &mut ChaCha8Rng::seed_from_u64(9));
        b.downsample(120, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn feature_cost_averages_lowest() {
        let g = gallery(4);
        let e = Embedding::normalized(vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let c = g.feature_cost(&e, 3);
        let near = 1.0 - 1.0 / 2f64.sqrt();
        assert!((c.min - near).abs() < 1e-12);
        assert!((c.avg_lowest - (2.0 * near + 1.0) / 3.0).abs() < 1e-12);
        let small = Gallery::new(Embedding::basis(4, 0), 0);
        assert!((small.feature_cost(&e, 3).avg_lowest - near).abs() < 1e-12);
    }
}
