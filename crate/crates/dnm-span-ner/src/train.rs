//! Training loop: BCE over positive/negative span-type pairs, two learning
//! rate groups (token representations vs everything else), linear warmup,
//! per-example type shuffling and random drop of absent types.

use dnm_core::EntityType;
use dnm_dataset::{to_span_input, AnnotatedListing, SpanNerExample};
use dnm_neural::{AdamState, NodeId, Tape};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{enumerate_spans, SpanNerModel};
use crate::{Result, SpanNerError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpanTrainConfig {
    pub num_steps: usize,
    pub batch_size: usize,
    pub eval_every: usize,
    pub warmup_ratio: f64,
    pub lr_encoder: f64,
    pub lr_others: f64,
    pub freeze_token_rep: bool,
    pub max_types: usize,
    pub shuffle_types: bool,
    pub random_drop: bool,
    pub max_neg_type_ratio: f64,
    pub max_len: usize,
    pub seed: u64,
    /// Entity types prompted during training.
    pub entity_types: Vec<EntityType>,
}

impl Default for SpanTrainConfig {
    fn default() -> Self {
        SpanTrainConfig {
            num_steps: 500,
            batch_size: 2,
            eval_every: 10,
            warmup_ratio: 0.1,
            lr_encoder: 1e-5,
            lr_others: 5e-5,
            freeze_token_rep: false,
            max_types: 25,
            shuffle_types: true,
            random_drop: true,
            max_neg_type_ratio: 1.0,
            max_len: 3000,
            seed: 42,
            entity_types: EntityType::STANDARD.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub steps: Vec<StepLog>,
}

impl TrainOutcome {
    pub fn loss_at(&self, step: usize) -> Option<f64> {
        self.steps.iter().find(|s| s.step == step).map(|s| s.loss)
    }
}

/// The BCE loss of one example over its candidate pairs. With
/// `neg_ratio >= 1` every pair contributes (the full loss sum); below 1,
/// negatives are uniformly subsampled to `ratio * |candidates|`, resampled
/// per call.
pub fn example_loss(
    model: &SpanNerModel,
    tape: &mut Tape<'_>,
    example: &SpanNerExample,
    neg_ratio: f64,
    rng: &mut ChaCha8Rng,
) -> Result<NodeId> {
    let spans = enumerate_spans(example.n(), model.config.max_span_width);
    let m = example.m();
    if spans.is_empty() || m == 0 {
        return Ok(tape.leaf(Array2::zeros((1, 1))));
    }
    let (p, h) = model.encode(tape, example)?;
    let q = model.type_reps(tape, p)?;
    let s = model.span_reps(tape, h, &spans)?;
    let logits = model.match_logits(tape, s, q)?;

    let mut targets = Array2::zeros((spans.len(), m));
    let k = model.config.max_span_width;
    for &(start, end, ti) in &example.gold {
        if ti < m && end >= start && end - start < k {
            // lexicographic enumeration: spans for position `start` begin at
            // a closed-form offset.
            let width = end - start;
            let idx = spans
                .binary_search(&(start, end))
                .unwrap_or_else(|_| panic!("span ({start},{end}) width {width} enumerated"));
            targets[[idx, ti]] = 1.0;
        }
    }

    let weights = if neg_ratio >= 1.0 {
        None
    } else {
        let total = spans.len() * m;
        let mut w = Array2::zeros((spans.len(), m));
        let mut negatives: Vec<usize> = Vec::with_capacity(total);
        for (flat, t) in targets.iter().enumerate() {
            if *t == 1.0 {
                w.as_slice_mut().unwrap()[flat] = 1.0;
            } else {
                negatives.push(flat);
            }
        }
        let budget = ((neg_ratio * total as f64).floor() as usize).min(negatives.len());
        negatives.shuffle(rng);
        for &flat in negatives.iter().take(budget) {
            w.as_slice_mut().unwrap()[flat] = 1.0;
        }
        Some(w)
    };

    Ok(tape.bce_with_logits_weighted(logits, targets, weights)?)
}

/// Run `num_steps` mini-batch updates. Deterministic for a fixed config and
/// seed; aborts with the step index if the loss goes non-finite.
pub fn train(
    model: &mut SpanNerModel,
    listings: &[AnnotatedListing],
    cfg: &SpanTrainConfig,
) -> Result<TrainOutcome> {
    if listings.is_empty() {
        return Err(SpanNerError::EmptyTrainSet);
    }
    if cfg.entity_types.len() > cfg.max_types {
        return Err(dnm_dataset::DatasetError::TooManyTypes(cfg.entity_types.len()).into());
    }
    let mut outcome = TrainOutcome { steps: Vec::new() };
    if cfg.num_steps == 0 {
        return Ok(outcome);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(&model.store);
    let warmup_steps = (cfg.warmup_ratio * cfg.num_steps as f64).ceil().max(1.0);

    let mut order: Vec<usize> = (0..listings.len()).collect();
    order.shuffle(&mut rng);
    let mut cursor = 0usize;

    for step in 1..=cfg.num_steps {
        let mut batch_ids = Vec::with_capacity(cfg.batch_size);
        for _ in 0..cfg.batch_size {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            batch_ids.push(order[cursor]);
            cursor += 1;
        }

        let mut tape = Tape::new(&model.store);
        tape.train = true;
        let mut batch_loss: Option<NodeId> = None;
        for &li in &batch_ids {
            let listing = &listings[li];
            let types = choose_types(listing, cfg, &mut rng);
            let example = to_span_input(listing, &types)?;
            let loss = example_loss(model, &mut tape, &example, cfg.max_neg_type_ratio, &mut rng)?;
            batch_loss = Some(match batch_loss {
                None => loss,
                Some(acc) => tape.add(acc, loss)?,
            });
        }
        let total = batch_loss.expect("non-empty batch");
        let mean = tape.scale(total, 1.0 / cfg.batch_size as f64);
        let loss_value = tape.scalar(mean);
        if !loss_value.is_finite() {
            return Err(SpanNerError::Diverged {
                step,
                loss: loss_value,
            });
        }

        let grads = tape.backward(mean)?;
        let warm = (step as f64 / warmup_steps).min(1.0);
        adam.step(&mut model.store, &grads, |id| {
            let base = if model.is_encoder_param(id) {
                if cfg.freeze_token_rep {
                    0.0
                } else {
                    cfg.lr_encoder
                }
            } else {
                cfg.lr_others
            };
            base * warm
        });

        if step == 1 || step % cfg.eval_every == 0 {
            outcome.steps.push(StepLog {
                step,
                loss: loss_value,
            });
        }
    }

    model.train_manifest = {
        let mut ids: Vec<String> = listings.iter().map(|l| l.page_id.clone()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    Ok(outcome)
}

/// Per-example prompt types: optional shuffle, optional random drop of
/// types absent from the gold annotation (present types always stay).
fn choose_types(
    listing: &AnnotatedListing,
    cfg: &SpanTrainConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<EntityType> {
    let mut types = cfg.entity_types.clone();
    if cfg.shuffle_types {
        types.shuffle(rng);
    }
    if cfg.random_drop {
        let kept: Vec<EntityType> = types
            .iter()
            .copied()
            .filter(|t| {
                listing.spans.iter().any(|s| s.entity_type == *t) || rng.random_bool(0.5)
            })
            .collect();
        if !kept.is_empty() {
            types = kept;
        }
    }
    types
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{example_for_tokens, SpanNerConfig};
    use dnm_core::{Language, MarketId};
    use dnm_dataset::TokenSpan;

    fn tiny_listing(i: usize) -> AnnotatedListing {
        // "vendor <name> price <amount>" with gold spans on name and amount
        let names = ["alice", "bob", "carol", "dave"];
        let amounts = ["12.50", "3.99", "45.00", "7.25"];
        let tokens: Vec<String> = ["vendor", names[i % 4], "price", amounts[i % 4]]
            .iter()
            .map(|s| s.to_string())
            .collect();
        AnnotatedListing {
            page_id: format!("agartha_item-{i:04}"),
            market_id: MarketId::AgarthaItem,
            language: Language::En,
            tokens,
            spans: vec![
                TokenSpan {
                    entity_type: EntityType::VendorName,
                    tok_start: 1,
                    tok_end: 1,
                    surface: names[i % 4].into(),
                },
                TokenSpan {
                    entity_type: EntityType::ProductPrice,
                    tok_start: 3,
                    tok_end: 3,
                    surface: amounts[i % 4].into(),
                },
            ],
        }
    }

    fn tiny_config(steps: usize) -> SpanTrainConfig {
        SpanTrainConfig {
            num_steps: steps,
            entity_types: vec![EntityType::VendorName, EntityType::ProductPrice],
            ..SpanTrainConfig::default()
        }
    }

    fn tiny_model(seed: u64) -> SpanNerModel {
        SpanNerModel::new(
            SpanNerConfig {
                dim: 16,
                max_span_width: 3,
                buckets: 64,
                ..SpanNerConfig::default()
            },
            vec!["vendor".into(), "price".into()],
            seed,
        )
    }

    #[test]
    fn zero_steps_leaves_the_model_unchanged() {
        let mut model = tiny_model(1);
        let before: Vec<_> = model.store.iter().map(|(_, p)| p.value.clone()).collect();
        let listings = vec![tiny_listing(0)];
        let outcome = train(&mut model, &listings, &tiny_config(0)).unwrap();
        assert!(outcome.steps.is_empty());
        for (i, (_, p)) in model.store.iter().enumerate() {
            assert_eq!(p.value, before[i]);
        }
        assert!(model.train_manifest.is_empty());
    }

    #[test]
    fn same_seed_gives_identical_step_logs() {
        let listings: Vec<_> = (0..6).map(tiny_listing).collect();
        let run = || {
            let mut model = tiny_model(3);
            train(&mut model, &listings, &tiny_config(25)).unwrap()
        };
        assert_eq!(run().steps, run().steps);
    }

    #[test]
    fn loss_values_match_hand_computation_at_score_half() {
        // Zeroed span head output layer: every phi is exactly 0.5.
        let mut model = tiny_model(9);
        let l2w = model.span_l2.w;
        model.store.value_mut(l2w).fill(0.0);
        let l2b = model.span_l2.b;
        model.store.value_mut(l2b).fill(0.0);

        // One token, one type, one gold pair, no negatives sampled.
        let mut ex = example_for_tokens(&["alice"], &[EntityType::VendorName]);
        ex.gold = vec![(0, 0, 0)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut tape = Tape::new(&model.store);
        let loss = example_loss(&model, &mut tape, &ex, 0.0, &mut rng).unwrap();
        assert!((tape.scalar(loss) - 2f64.ln()).abs() < 1e-9);

        // Two tokens: one positive and exactly one sampled negative pair.
        let mut ex2 = example_for_tokens(&["alice", "x"], &[EntityType::VendorName]);
        ex2.gold = vec![(0, 0, 0)];
        // spans of width <= 3 over 2 tokens: (0,0) (0,1) (1,1) -> 3 pairs.
        let mut tape2 = Tape::new(&model.store);
        let loss2 = example_loss(&model, &mut tape2, &ex2, 1.0 / 3.0, &mut rng).unwrap();
        assert!((tape2.scalar(loss2) - 2.0 * 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn training_reduces_loss_on_a_tiny_task() {
        let listings: Vec<_> = (0..8).map(tiny_listing).collect();
        let mut model = tiny_model(5);
        let mut cfg = tiny_config(120);
        // from-scratch tiny model: the schedule shape stays, rates scale up
        cfg.lr_encoder = 1e-3;
        cfg.lr_others = 5e-3;
        let outcome = train(&mut model, &listings, &cfg).unwrap();
        let first = outcome.steps.first().unwrap().loss;
        let last = outcome.steps.last().unwrap().loss;
        assert!(last < first * 0.5, "loss {first} -> {last}");
        assert_eq!(model.train_manifest.len(), 8);
    }

    #[test]
    fn gold_spans_score_above_average_after_training() {
        let listings: Vec<_> = (0..8).map(tiny_listing).collect();
        let mut model = tiny_model(5);
        let mut cfg = tiny_config(120);
        cfg.lr_encoder = 1e-3;
        cfg.lr_others = 5e-3;
        train(&mut model, &listings, &cfg).unwrap();

        let types = [EntityType::VendorName, EntityType::ProductPrice];
        let mut gold_scores = Vec::new();
        let mut other_scores = Vec::new();
        for l in &listings {
            let ex = dnm_dataset::to_span_input(l, &types).unwrap();
            let (spans, scores) = model.score_all(&ex).unwrap();
            for (si, &span) in spans.iter().enumerate() {
                for t in 0..2 {
                    let is_gold = ex.gold.contains(&(span.0, span.1, t));
                    if is_gold {
                        gold_scores.push(scores[[si, t]]);
                    } else {
                        other_scores.push(scores[[si, t]]);
                    }
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            mean(&gold_scores) > mean(&other_scores),
            "gold {} vs other {}",
            mean(&gold_scores),
            mean(&other_scores)
        );
    }
}
