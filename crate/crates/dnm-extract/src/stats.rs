//! Descriptive statistics over an annotated corpus: top vendor-market
//! pairs, top model/category values, and per-market listing shares.

use std::collections::BTreeMap;
use std::path::Path;

use dnm_core::{AnnotatedPage, EntityType, MarketId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// (vendor, market, listing count), descending, top 10.
    pub top_vendor_markets: Vec<(String, MarketId, usize)>,
    /// (model/category value, count), descending, top 10.
    pub top_models: Vec<(String, usize)>,
    /// (market, share of listings); shares sum to 1 for a non-empty corpus.
    pub market_shares: Vec<(MarketId, f64)>,
    pub total_pages: usize,
}

pub fn corpus_stats(pages: &[AnnotatedPage]) -> CorpusStats {
    let mut vendor_market: BTreeMap<(String, MarketId), usize> = BTreeMap::new();
    let mut models: BTreeMap<String, usize> = BTreeMap::new();
    let mut per_market: BTreeMap<MarketId, usize> = BTreeMap::new();

    for page in pages {
        *per_market.entry(page.market_id).or_default() += 1;
        for e in &page.entities {
            match e.entity_type {
                EntityType::VendorName => {
                    *vendor_market
                        .entry((e.surface.clone(), page.market_id))
                        .or_default() += 1;
                }
                EntityType::Model => {
                    *models.entry(e.surface.clone()).or_default() += 1;
                }
                _ => {}
            }
        }
    }

    let mut top_vendor_markets: Vec<_> = vendor_market
        .into_iter()
        .map(|((vendor, market), n)| (vendor, market, n))
        .collect();
    top_vendor_markets.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
    top_vendor_markets.truncate(10);

    let mut top_models: Vec<_> = models.into_iter().collect();
    top_models.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top_models.truncate(10);

    let total = pages.len();
    let market_shares = per_market
        .into_iter()
        .map(|(m, n)| (m, n as f64 / total as f64))
        .collect();

    CorpusStats {
        top_vendor_markets,
        top_models,
        market_shares,
        total_pages: total,
    }
}

impl CorpusStats {
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["section", "key", "market", "value"])?;
        for (vendor, market, n) in &self.top_vendor_markets {
            w.write_record(["top_vendor_market", vendor, market.as_str(), &n.to_string()])?;
        }
        for (model, n) in &self.top_models {
            w.write_record(["top_model", model, "", &n.to_string()])?;
        }
        for (market, share) in &self.market_shares {
            w.write_record(["market_share", "", market.as_str(), &format!("{share:.4}")])?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dnm_core::{Language, SpanAnnotation};

    fn page(id: &str, market: MarketId, vendor: &str) -> AnnotatedPage {
        AnnotatedPage {
            page_id: id.to_string(),
            market_id: market,
            language: market.language(),
            text: format!("vendor {vendor}"),
            entities: vec![SpanAnnotation {
                entity_type: EntityType::VendorName,
                char_start: 7,
                char_end: 7 + vendor.len(),
                surface: vendor.to_string(),
            }],
        }
    }

    #[test]
    fn top_vendor_market_pair() {
        let mut pages: Vec<_> = (0..7)
            .map(|i| page(&format!("c{i}"), MarketId::Cocorico, "alice"))
            .collect();
        pages.push(page("s0", MarketId::Silkroad, "bob"));
        let stats = corpus_stats(&pages);
        assert_eq!(
            stats.top_vendor_markets[0],
            ("alice".to_string(), MarketId::Cocorico, 7)
        );
    }

    #[test]
    fn single_market_share_is_one() {
        let pages = vec![page("a", MarketId::Silkroad, "v")];
        let stats = corpus_stats(&pages);
        assert_eq!(stats.market_shares, vec![(MarketId::Silkroad, 1.0)]);
    }

    #[test]
    fn empty_corpus_is_empty_tables() {
        let stats = corpus_stats(&[]);
        assert!(stats.top_vendor_markets.is_empty());
        assert!(stats.top_models.is_empty());
        assert!(stats.market_shares.is_empty());
    }
}
