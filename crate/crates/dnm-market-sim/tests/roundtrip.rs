//! Generator <-> pattern co-design checks: labels recovered from generated
//! pages must match ground truth exactly on clean pages and stay above the
//! accuracy bar under default noise.

use std::collections::BTreeMap;

use dnm_core::{EntityType, GroundTruthEntity, MarketId};
use dnm_extract::{apply_patterns, verify_labels, NormalizedDoc, PatternSet};
use dnm_market_sim::{entity_inventory, generate_corpus, Corpus, GenConfig};

fn label_corpus(
    corpus: &Corpus,
) -> (
    Vec<(MarketId, String, Vec<dnm_extract::label::LabeledEntity>)>,
    BTreeMap<String, Vec<GroundTruthEntity>>,
) {
    let patterns = PatternSet::default().compile().unwrap();
    let mut labeled = Vec::new();
    let mut gold = BTreeMap::new();
    for listing in &corpus.listings {
        let doc = NormalizedDoc::from_html(&listing.page_id, listing.market_id, &listing.html);
        let labels = apply_patterns(&doc, &patterns).unwrap();
        labeled.push((listing.market_id, listing.page_id.clone(), labels));
        gold.insert(listing.page_id.clone(), listing.entities.clone());
    }
    (labeled, gold)
}

#[test]
fn clean_pages_label_perfectly_on_every_market() {
    let mut cfg = GenConfig::new(7).with_noise(0.0);
    for market in MarketId::ALL {
        cfg.counts.insert(market, 25);
    }
    let corpus = generate_corpus(&cfg).unwrap();
    for listing in &corpus.listings {
        listing.validate().unwrap();
    }
    let (labeled, gold) = label_corpus(&corpus);
    let report = verify_labels(&labeled, &gold).unwrap();
    for row in &report.rows {
        assert_eq!(
            row.exact_correct, row.attempted,
            "{}/{} labels wrong: {:?}",
            row.market_id, row.entity_type, row
        );
        assert_eq!(row.matched, row.attempted);
    }
    assert_eq!(report.overall_accuracy(), 1.0);
}

#[test]
fn noisy_default_corpus_stays_above_the_accuracy_bar() {
    let cfg = GenConfig::default_six(40, 42);
    let corpus = generate_corpus(&cfg).unwrap();
    let (labeled, gold) = label_corpus(&corpus);
    let report = verify_labels(&labeled, &gold).unwrap();
    let acc = report.overall_accuracy();
    assert!(acc >= 0.90, "overall accuracy {acc} below bar");
    assert!(acc < 1.0, "noise should break some labels, got {acc}");
}

#[test]
fn regeneration_is_byte_identical() {
    let cfg = GenConfig::default_six(10, 1).with_noise(0.3);
    let a = generate_corpus(&cfg).unwrap();
    let b = generate_corpus(&cfg).unwrap();
    assert_eq!(a.listings.len(), b.listings.len());
    for (x, y) in a.listings.iter().zip(&b.listings) {
        assert_eq!(x.html, y.html);
        assert_eq!(x.entities, y.entities);
    }
    assert_eq!(a.manifest(), b.manifest());
}

#[test]
fn empty_config_yields_empty_corpus() {
    let corpus = generate_corpus(&GenConfig::new(7)).unwrap();
    assert!(corpus.is_empty());
    assert!(corpus.manifest().is_empty());
}

#[test]
fn mean_tokens_track_the_per_market_budget() {
    let mut cfg = GenConfig::new(11);
    for market in MarketId::ALL {
        cfg.counts.insert(market, 20);
    }
    let corpus = generate_corpus(&cfg).unwrap();
    let mut totals: BTreeMap<MarketId, (usize, usize)> = BTreeMap::new();
    for listing in &corpus.listings {
        let doc = NormalizedDoc::from_html(&listing.page_id, listing.market_id, &listing.html);
        let e = totals.entry(listing.market_id).or_default();
        e.0 += doc.tokens.len();
        e.1 += 1;
    }
    for (market, (tokens, pages)) in totals {
        let mean = tokens as f64 / pages as f64;
        let budget = dnm_market_sim::template::token_budget(market) as f64;
        assert!(
            (mean - budget).abs() <= 0.30 * budget,
            "{market}: mean {mean} vs budget {budget}"
        );
    }
}

#[test]
fn french_filler_appears_only_on_cocorico() {
    let mut cfg = GenConfig::new(3).with_noise(0.2);
    for market in MarketId::ALL {
        cfg.counts.insert(market, 10);
    }
    let corpus = generate_corpus(&cfg).unwrap();
    let french: Vec<&str> = dnm_market_sim::vocab::FILLER_FR.to_vec();
    for listing in &corpus.listings {
        if listing.market_id == MarketId::Cocorico {
            continue;
        }
        let doc = NormalizedDoc::from_html(&listing.page_id, listing.market_id, &listing.html);
        for tok in &doc.tokens {
            assert!(
                !french.contains(&tok.surface.as_str()),
                "french token {:?} on {}",
                tok.surface,
                listing.market_id
            );
        }
    }
}

#[test]
fn inventory_matches_brute_force_scan() {
    let cfg = GenConfig::new(5)
        .with_market(MarketId::AgarthaItem, 10)
        .with_market(MarketId::Palmetto, 1);
    let corpus = generate_corpus(&cfg).unwrap();
    let inv = entity_inventory(&corpus);
    assert_eq!(inv[&EntityType::Product], 11);
    assert_eq!(inv[&EntityType::Sku], 1);
    assert_eq!(inv[&EntityType::Brand], 1);
    // brute force
    let mut expect: BTreeMap<EntityType, usize> = BTreeMap::new();
    for l in &corpus.listings {
        for e in &l.entities {
            *expect.entry(e.entity_type).or_default() += 1;
        }
    }
    assert_eq!(inv, expect);
    assert!(entity_inventory(&Corpus::default()).is_empty());
}
