//! Oracle equivalence: `apply_patterns` (engine leftmost-first search) must
//! agree with a naive scan-every-position matcher on a large sample of
//! generated documents, and every label's offsets must slice its surface.

use dnm_core::MarketId;
use dnm_extract::{apply_patterns, NormalizedDoc, PatternSet};
use dnm_market_sim::{generate_corpus, GenConfig};
use fancy_regex::Regex;

/// First match by trying an anchored variant at every char position.
/// Patterns anchored with `^` are only meaningful at position zero.
fn naive_first_match(pattern: &str, group: usize, text: &str) -> Option<(usize, usize, String)> {
    let anchored = Regex::new(&format!(r"\A(?:{pattern})")).unwrap();
    let positions: Vec<usize> = if pattern.starts_with('^') {
        vec![0]
    } else {
        text.char_indices().map(|(i, _)| i).collect()
    };
    for pos in positions {
        if let Ok(Some(caps)) = anchored.captures(&text[pos..]) {
            if let Some(m) = caps.get(group) {
                return Some((pos + m.start(), pos + m.end(), m.as_str().to_string()));
            }
        }
    }
    None
}

#[test]
fn engine_matches_agree_with_position_scan_on_1000_docs() {
    // 1000 documents, weighted toward the shorter markets to keep the
    // quadratic oracle affordable.
    let mut cfg = GenConfig::new(1234).with_noise(0.3);
    cfg.counts.insert(MarketId::AgarthaItem, 200);
    cfg.counts.insert(MarketId::AgarthaPurchase, 150);
    cfg.counts.insert(MarketId::Berlusconi, 150);
    cfg.counts.insert(MarketId::Cocorico, 200);
    cfg.counts.insert(MarketId::Darkmarket, 150);
    cfg.counts.insert(MarketId::Silkroad, 100);
    cfg.counts.insert(MarketId::Cannahome, 25);
    cfg.counts.insert(MarketId::Palmetto, 25);
    let corpus = generate_corpus(&cfg).unwrap();
    assert_eq!(corpus.len(), 1000);

    let set = PatternSet::default();
    let compiled = set.compile().unwrap();
    for listing in &corpus.listings {
        let doc = NormalizedDoc::from_html(&listing.page_id, listing.market_id, &listing.html);
        let labels = apply_patterns(&doc, &compiled).unwrap();
        for spec in set.specs(listing.market_id).unwrap() {
            let engine = labels
                .iter()
                .find(|l| l.entity_type == spec.entity_type)
                .map(|l| (l.char_start, l.char_end, l.surface.clone()));
            let naive = naive_first_match(spec.pattern, spec.group, &doc.text);
            assert_eq!(
                engine, naive,
                "{} {} on {}",
                listing.market_id, spec.entity_type, listing.page_id
            );
        }
        // Offset fidelity along the way.
        for l in &labels {
            assert_eq!(&doc.text[l.char_start..l.char_end], l.surface);
        }
    }
}

#[test]
fn cocorico_page_contains_the_stock_keyword_exactly_once() {
    let cfg = GenConfig::new(77)
        .with_noise(0.0)
        .with_market(MarketId::Cocorico, 5);
    let corpus = generate_corpus(&cfg).unwrap();
    for listing in &corpus.listings {
        let text = dnm_extract::normalize(&dnm_extract::html_to_text(&listing.html));
        assert_eq!(text.matches("disponibilité").count(), 1);
    }
}
