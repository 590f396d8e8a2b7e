//! Regex labeling and labeling-accuracy verification.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use dnm_core::{EntityType, GroundTruthEntity, MarketId, SpanAnnotation};
use serde::{Deserialize, Serialize};

use crate::normalize::NormalizedDoc;
use crate::patterns::CompiledPatterns;
use crate::{ExtractError, Result};

/// Where a label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    Regex,
    GroundTruth,
    Model,
}

/// A labeled entity span over normalized text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledEntity {
    pub page_id: String,
    pub entity_type: EntityType,
    pub char_start: usize,
    pub char_end: usize,
    pub surface: String,
    pub source: LabelSource,
}

impl LabeledEntity {
    pub fn annotation(&self) -> SpanAnnotation {
        SpanAnnotation {
            entity_type: self.entity_type,
            char_start: self.char_start,
            char_end: self.char_end,
            surface: self.surface.clone(),
        }
    }
}

/// Label a normalized page with its market's patterns. For each entity type
/// the first match's designated capture group becomes the label; a type with
/// no match is simply absent.
pub fn apply_patterns(
    doc: &NormalizedDoc,
    patterns: &CompiledPatterns,
) -> Result<Vec<LabeledEntity>> {
    let specs = patterns
        .for_market(doc.market_id)
        .ok_or(ExtractError::MissingMarket(doc.market_id))?;
    let mut labels = Vec::new();
    for (entity_type, re, group) in specs {
        // A backtracking-limit error is treated as no match; the generated
        // corpus never gets near the limit.
        if let Some(caps) = re.captures(&doc.text).ok().flatten() {
            if let Some(m) = caps.get(*group) {
                labels.push(LabeledEntity {
                    page_id: doc.page_id.clone(),
                    entity_type: *entity_type,
                    char_start: m.start(),
                    char_end: m.end(),
                    surface: m.as_str().to_string(),
                    source: LabelSource::Regex,
                });
            }
        }
    }
    Ok(labels)
}

/// Accuracy statistics for one (market, entity type) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketTypeStats {
    pub market_id: MarketId,
    pub entity_type: EntityType,
    /// Gold entities of this type on this market's pages.
    pub attempted: usize,
    /// Labels the patterns produced.
    pub matched: usize,
    /// Labels whose (type, surface) equals ground truth exactly.
    pub exact_correct: usize,
}

impl MarketTypeStats {
    pub fn accuracy(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.exact_correct as f64 / self.attempted as f64
        }
    }
}

/// Labeling-accuracy report, per (market, entity type) and aggregated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelingReport {
    pub rows: Vec<MarketTypeStats>,
    pub overall_attempted: usize,
    pub overall_correct: usize,
}

impl LabelingReport {
    /// Count-weighted overall accuracy.
    pub fn overall_accuracy(&self) -> f64 {
        if self.overall_attempted == 0 {
            0.0
        } else {
            self.overall_correct as f64 / self.overall_attempted as f64
        }
    }

    pub fn market_accuracy(&self, market: MarketId) -> f64 {
        let (correct, attempted) = self
            .rows
            .iter()
            .filter(|r| r.market_id == market)
            .fold((0, 0), |(c, a), r| (c + r.exact_correct, a + r.attempted));
        if attempted == 0 {
            0.0
        } else {
            correct as f64 / attempted as f64
        }
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["market", "entity_type", "attempted", "matched", "exact_correct", "accuracy"])?;
        for r in &self.rows {
            w.write_record([
                r.market_id.to_string(),
                r.entity_type.to_string(),
                r.attempted.to_string(),
                r.matched.to_string(),
                r.exact_correct.to_string(),
                format!("{:.3}", r.accuracy()),
            ])?;
        }
        w.write_record([
            "overall".to_string(),
            "all".to_string(),
            self.overall_attempted.to_string(),
            String::new(),
            self.overall_correct.to_string(),
            format!("{:.3}", self.overall_accuracy()),
        ])?;
        w.flush()
    }
}

/// Compare regex labels to generator ground truth. A label is exactly
/// correct when its (entity type, surface) pair equals a gold entity on the
/// same page. Both sides must cover the same page ids.
pub fn verify_labels(
    labeled: &[(MarketId, String, Vec<LabeledEntity>)],
    gold: &BTreeMap<String, Vec<GroundTruthEntity>>,
) -> Result<LabelingReport> {
    let labeled_ids: BTreeSet<&str> = labeled.iter().map(|(_, id, _)| id.as_str()).collect();
    let gold_ids: BTreeSet<&str> = gold.keys().map(|s| s.as_str()).collect();
    if labeled_ids != gold_ids {
        let missing: Vec<_> = gold_ids.symmetric_difference(&labeled_ids).take(4).collect();
        return Err(ExtractError::PageIdMismatch(format!("{missing:?}")));
    }

    let mut cells: BTreeMap<(MarketId, EntityType), MarketTypeStats> = BTreeMap::new();
    fn cell<'c>(
        cells: &'c mut BTreeMap<(MarketId, EntityType), MarketTypeStats>,
        market: MarketId,
        entity: EntityType,
    ) -> &'c mut MarketTypeStats {
        cells.entry((market, entity)).or_insert(MarketTypeStats {
            market_id: market,
            entity_type: entity,
            attempted: 0,
            matched: 0,
            exact_correct: 0,
        })
    }

    for (market, page_id, labels) in labeled {
        let gold_page = &gold[page_id];
        for g in gold_page {
            cell(&mut cells, *market, g.entity_type).attempted += 1;
        }
        for label in labels {
            let stats = cell(&mut cells, *market, label.entity_type);
            stats.matched += 1;
            if gold_page
                .iter()
                .any(|g| g.entity_type == label.entity_type && g.surface == label.surface)
            {
                stats.exact_correct += 1;
            }
        }
    }

    let overall_attempted = cells.values().map(|c| c.attempted).sum();
    let overall_correct = cells.values().map(|c| c.exact_correct).sum();
    Ok(LabelingReport {
        rows: cells.into_values().collect(),
        overall_attempted,
        overall_correct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::PatternSet;

    fn doc(market: MarketId, text: &str) -> NormalizedDoc {
        NormalizedDoc {
            page_id: "p0".into(),
            market_id: market,
            language: market.language(),
            text: text.to_string(),
            tokens: crate::normalize::tokenize_with_offsets(text),
        }
    }

    #[test]
    fn agartha_stock_and_price() {
        let patterns = PatternSet::default().compile().unwrap();
        let d = doc(MarketId::AgarthaItem, "vendor bob availability 42 price 12.50 usd");
        let labels = apply_patterns(&d, &patterns).unwrap();
        let get = |t: EntityType| labels.iter().find(|l| l.entity_type == t);
        assert_eq!(get(EntityType::QuantityInStock).unwrap().surface, "42");
        assert_eq!(get(EntityType::ProductPrice).unwrap().surface, "12.50");
        assert_eq!(get(EntityType::VendorName).unwrap().surface, "bob");
        // no "purchase" keyword: market name absent
        assert!(get(EntityType::MarketName).is_none());
    }

    #[test]
    fn no_keyword_means_absent() {
        let patterns = PatternSet::default().compile().unwrap();
        let d = doc(MarketId::AgarthaItem, "something 12.50 else");
        let labels = apply_patterns(&d, &patterns).unwrap();
        assert!(!labels.iter().any(|l| l.entity_type == EntityType::ProductPrice));
    }

    #[test]
    fn offsets_slice_the_text() {
        let patterns = PatternSet::default().compile().unwrap();
        let d = doc(MarketId::Cocorico, "cocorico market disponibilité 7 vu 99 45,00 €");
        for l in apply_patterns(&d, &patterns).unwrap() {
            assert_eq!(&d.text[l.char_start..l.char_end], l.surface);
        }
    }

    #[test]
    fn accuracy_arithmetic() {
        let gold: BTreeMap<String, Vec<GroundTruthEntity>> = (0..10)
            .map(|i| {
                let id = format!("p{i}");
                let g = GroundTruthEntity {
                    page_id: id.clone(),
                    entity_type: EntityType::ProductPrice,
                    char_start: 0,
                    char_end: 1,
                    surface: format!("{i}.00"),
                };
                (id, vec![g])
            })
            .collect();
        let labeled: Vec<_> = (0..10)
            .map(|i| {
                // one of ten labels is wrong
                let surface = if i == 3 { "9.99".to_string() } else { format!("{i}.00") };
                let l = LabeledEntity {
                    page_id: format!("p{i}"),
                    entity_type: EntityType::ProductPrice,
                    char_start: 0,
                    char_end: 1,
                    surface,
                    source: LabelSource::Regex,
                };
                (MarketId::AgarthaItem, format!("p{i}"), vec![l])
            })
            .collect();
        let report = verify_labels(&labeled, &gold).unwrap();
        assert!((report.overall_accuracy() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn page_id_mismatch_is_an_error() {
        let gold = BTreeMap::from([("p1".to_string(), vec![])]);
        let labeled = vec![(MarketId::AgarthaItem, "p2".to_string(), vec![])];
        assert!(matches!(
            verify_labels(&labeled, &gold),
            Err(ExtractError::PageIdMismatch(_))
        ));
    }
}
