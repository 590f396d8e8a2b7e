//! Deterministic market-stratified train/test split.

use std::collections::BTreeMap;

use dnm_core::MarketId;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{DatasetError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub ratio: f64,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl SplitManifest {
    pub fn is_train(&self, page_id: &str) -> bool {
        self.train.iter().any(|p| p == page_id)
    }
}

/// Shuffle deterministically and split `ratio` of pages into train,
/// stratified by market: a market with at least two pages lands on both
/// sides, and the global train count stays within one page of the ratio.
pub fn split(pages: &[(String, MarketId)], ratio: f64, seed: u64) -> Result<SplitManifest> {
    if pages.is_empty() {
        return Err(DatasetError::EmptyCorpus);
    }
    let mut by_market: BTreeMap<MarketId, Vec<&str>> = BTreeMap::new();
    for (page_id, market) in pages {
        by_market.entry(*market).or_default().push(page_id);
    }
    for (market, ids) in by_market.iter_mut() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (market.as_str().len() as u64) << 32
            ^ market.as_str().bytes().map(u64::from).sum::<u64>());
        ids.sort_unstable();
        ids.shuffle(&mut rng);
    }

    let total = pages.len();
    let target_train = (ratio * total as f64).round() as usize;

    // Largest-remainder apportionment of the train budget across markets.
    let mut alloc: Vec<(MarketId, usize, f64, usize)> = by_market
        .iter()
        .map(|(&m, ids)| {
            let exact = ratio * ids.len() as f64;
            (m, exact.floor() as usize, exact - exact.floor(), ids.len())
        })
        .collect();
    let mut assigned: usize = alloc.iter().map(|a| a.1).sum();
    let mut by_rem: Vec<usize> = (0..alloc.len()).collect();
    by_rem.sort_by(|&a, &b| alloc[b].2.partial_cmp(&alloc[a].2).unwrap());
    for &i in by_rem.iter().cycle() {
        if assigned >= target_train {
            break;
        }
        if alloc[i].1 < alloc[i].3 {
            alloc[i].1 += 1;
            assigned += 1;
        }
    }
    // Keep both sides non-empty for any market with two or more pages.
    for a in alloc.iter_mut() {
        if a.3 >= 2 {
            a.1 = a.1.clamp(1, a.3 - 1);
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (market, take, _, _) in &alloc {
        let ids = &by_market[market];
        for (i, id) in ids.iter().enumerate() {
            if i < *take {
                train.push(id.to_string());
            } else {
                test.push(id.to_string());
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitManifest {
        seed,
        ratio,
        train,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pages(counts: &[(MarketId, usize)]) -> Vec<(String, MarketId)> {
        counts
            .iter()
            .flat_map(|&(m, n)| (0..n).map(move |i| (format!("{m}-{i:04}"), m)))
            .collect()
    }

    #[test]
    fn ten_pages_split_eight_two() {
        let p = pages(&[(MarketId::AgarthaItem, 10)]);
        let m = split(&p, 0.8, 42).unwrap();
        assert_eq!(m.train.len(), 8);
        assert_eq!(m.test.len(), 2);
    }

    #[test]
    fn same_seed_is_identical_and_different_seed_is_not() {
        let p = pages(&[(MarketId::AgarthaItem, 20), (MarketId::Silkroad, 20)]);
        let a = split(&p, 0.8, 7).unwrap();
        let b = split(&p, 0.8, 7).unwrap();
        assert_eq!(a, b);
        let c = split(&p, 0.8, 8).unwrap();
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn every_market_lands_on_both_sides() {
        let p = pages(&[
            (MarketId::AgarthaItem, 5),
            (MarketId::Berlusconi, 2),
            (MarketId::Cannahome, 9),
            (MarketId::Cocorico, 3),
            (MarketId::Darkmarket, 2),
            (MarketId::Silkroad, 7),
        ]);
        let m = split(&p, 0.8, 1).unwrap();
        for market in MarketId::DEFAULT_SIX {
            let prefix = format!("{market}-");
            assert!(m.train.iter().any(|p| p.starts_with(&prefix)), "{market} train");
            assert!(m.test.iter().any(|p| p.starts_with(&prefix)), "{market} test");
        }
        // disjoint and complete
        assert_eq!(m.train.len() + m.test.len(), p.len());
        for id in &m.train {
            assert!(!m.test.contains(id));
        }
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(split(&[], 0.8, 0).is_err());
    }
}
