//! Decoding: score all spans against all prompted types, keep scores at or
//! above the threshold, then greedily select by descending score, skipping
//! anything that overlaps an already-selected span (flat output).

use dnm_core::{EntityType, PredictedSpan};
use dnm_dataset::SpanNerExample;

use crate::model::SpanNerModel;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SpanPrediction {
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub type_index: usize,
    pub entity_type: EntityType,
    pub score: f64,
}

impl SpanPrediction {
    pub fn to_wire(&self) -> PredictedSpan {
        PredictedSpan {
            start: self.start,
            end: self.end,
            entity_type: self.entity_type,
            score: self.score,
        }
    }
}

pub fn predict(
    model: &SpanNerModel,
    tokens: &[String],
    types: &[EntityType],
    threshold: f64,
) -> Result<Vec<SpanPrediction>> {
    let example = SpanNerExample {
        page_id: String::new(),
        entity_types: types.to_vec(),
        text_tokens: tokens.to_vec(),
        gold: Vec::new(),
        truncated: false,
    };
    if types.len() > dnm_dataset::MAX_TYPES {
        return Err(dnm_dataset::DatasetError::TooManyTypes(types.len()).into());
    }
    let (spans, scores) = model.score_all(&example)?;

    let mut candidates: Vec<SpanPrediction> = Vec::new();
    for (si, &(start, end)) in spans.iter().enumerate() {
        for (ti, &ty) in types.iter().enumerate() {
            let score = scores[[si, ti]];
            if score >= threshold {
                candidates.push(SpanPrediction {
                    start,
                    end,
                    type_index: ti,
                    entity_type: ty,
                    score,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| (a.start, a.end, a.type_index).cmp(&(b.start, b.end, b.type_index)))
    });

    let mut kept: Vec<SpanPrediction> = Vec::new();
    for cand in candidates {
        let overlaps = kept
            .iter()
            .any(|k| cand.start <= k.end && k.start <= cand.end);
        if !overlaps {
            kept.push(cand);
        }
    }
    kept.sort_by_key(|p| (p.start, p.end));
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SpanNerConfig, SpanNerModel};

    fn model() -> SpanNerModel {
        SpanNerModel::new(
            SpanNerConfig {
                dim: 16,
                max_span_width: 4,
                buckets: 64,
                ..SpanNerConfig::default()
            },
            vec!["vendor".into(), "alice".into(), "price".into()],
            13,
        )
    }

    fn tokens() -> Vec<String> {
        "vendor alice price 12.50 usd today"
            .split(' ')
            .map(String::from)
            .collect()
    }

    const TYPES: [EntityType; 2] = [EntityType::VendorName, EntityType::ProductPrice];

    #[test]
    fn high_threshold_yields_nothing() {
        let preds = predict(&model(), &tokens(), &TYPES, 1.0).unwrap();
        assert!(preds.is_empty());
    }

    #[test]
    fn decoded_spans_never_overlap_and_respect_the_threshold() {
        for threshold in [0.0, 0.3, 0.5] {
            let preds = predict(&model(), &tokens(), &TYPES, threshold).unwrap();
            for p in &preds {
                assert!(p.score >= threshold);
                assert!(p.end - p.start < 4);
            }
            for (i, a) in preds.iter().enumerate() {
                for b in preds.iter().skip(i + 1) {
                    assert!(a.end < b.start || b.end < a.start, "{a:?} overlaps {b:?}");
                }
            }
        }
    }

    #[test]
    fn raising_the_threshold_never_adds_spans() {
        let m = model();
        let toks = tokens();
        let mut last = usize::MAX;
        for threshold in [0.0, 0.25, 0.5, 0.75, 0.9] {
            let n = predict(&m, &toks, &TYPES, threshold).unwrap().len();
            assert!(n <= last, "threshold {threshold}: {n} > {last}");
            last = n;
        }
    }

    #[test]
    fn greedy_keeps_the_higher_scored_of_two_overlapping_candidates() {
        let m = model();
        let toks = tokens();
        let all = predict(&m, &toks, &TYPES, 0.0).unwrap();
        // every candidate overlapping a kept span must score no higher
        let (spans, scores) = m
            .score_all(&crate::model::example_for_tokens(
                &toks.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
                &TYPES,
            ))
            .unwrap();
        for (si, &(s, e)) in spans.iter().enumerate() {
            for ti in 0..TYPES.len() {
                let kept = all
                    .iter()
                    .find(|p| p.start <= e && s <= p.end)
                    .expect("threshold 0 covers every token");
                assert!(scores[[si, ti]] <= kept.score + 1e-12);
            }
        }
    }

    #[test]
    fn too_many_types_is_an_error() {
        let types = vec![EntityType::Product; 26];
        assert!(predict(&model(), &tokens(), &types, 0.5).is_err());
    }
}
