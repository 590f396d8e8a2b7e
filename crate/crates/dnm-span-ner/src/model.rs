//! Model definition and scoring.
//!
//! The unified input [ENT] t_0 [ENT] t_1 ... [SEP] w_0 ... is embedded with
//! a shared hash embedding; each [ENT] marker's embedding additionally
//! carries its type word, so the marker position identifies its type even
//! before encoding. A one-layer bidirectional recurrent encoder (projected
//! back to D) produces type representations p (rows at [ENT] positions) and
//! token representations h. A two-layer FFN refines p into q; span
//! representations come from FFN(h_i (+) h_j) over all spans up to the
//! width cap; the match score is sigmoid(S_ij . q_t).

use dnm_core::EntityType;
use dnm_dataset::SpanNerExample;
use dnm_neural::layers::{BiLstm, Ffn2, Linear};
use dnm_neural::{
    checkpoint, init, HashEmbedding, HashEmbeddingSpec, NodeId, ParamId, ParamStore, Tape,
};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Result, SpanNerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderMode {
    /// Bidirectional recurrent encoder (the real model).
    BiLstm,
    /// Identity per position, for bookkeeping diagnostics.
    Identity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpanNerConfig {
    pub dim: usize,
    pub max_span_width: usize,
    pub threshold: f64,
    pub buckets: usize,
    pub hash_seed: u64,
    pub encoder: EncoderMode,
}

impl Default for SpanNerConfig {
    fn default() -> Self {
        SpanNerConfig {
            dim: 64,
            max_span_width: 12,
            threshold: 0.5,
            buckets: 2048,
            hash_seed: 0x5eed,
            encoder: EncoderMode::BiLstm,
        }
    }
}

pub struct SpanNerModel {
    pub config: SpanNerConfig,
    pub store: ParamStore,
    pub embedding: HashEmbedding,
    encoder: BiLstm,
    proj: Linear,
    type_ffn: Ffn2,
    span_w_start: ParamId,
    span_w_end: ParamId,
    span_b1: ParamId,
    span_l2: Linear,
    ent_embed: ParamId,
    sep_embed: ParamId,
    /// Page ids this model was trained on; evaluation protocols check it
    /// for leakage.
    pub train_manifest: Vec<String>,
}

impl SpanNerModel {
    pub fn new(config: SpanNerConfig, vocab: Vec<String>, seed: u64) -> SpanNerModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let d = config.dim;
        let spec = HashEmbeddingSpec::from_words(vocab, d, config.buckets, config.hash_seed);
        let embedding = HashEmbedding::new(&mut store, &mut rng, spec);
        let encoder = BiLstm::new(&mut store, &mut rng, "encoder", d, d);
        let proj = Linear::new(&mut store, &mut rng, "proj", 2 * d, d);
        let type_ffn = Ffn2::new(&mut store, &mut rng, "type_ffn", d, d, d);
        let span_w_start = store.add("span_ffn.w1_start", init::xavier(&mut rng, d, d));
        let span_w_end = store.add("span_ffn.w1_end", init::xavier(&mut rng, d, d));
        let span_b1 = store.add("span_ffn.b1", init::zeros(1, d));
        let span_l2 = Linear::new(&mut store, &mut rng, "span_ffn.l2", d, d);
        let ent_embed = store.add("special.ent", init::normal(&mut rng, 1, d, 0.5));
        let sep_embed = store.add("special.sep", init::normal(&mut rng, 1, d, 0.5));
        SpanNerModel {
            config,
            store,
            embedding,
            encoder,
            proj,
            type_ffn,
            span_w_start,
            span_w_end,
            span_b1,
            span_l2,
            ent_embed,
            sep_embed,
            train_manifest: Vec::new(),
        }
    }

    fn attach(config: SpanNerConfig, store: ParamStore, spec: HashEmbeddingSpec) -> SpanNerModel {
        let d = config.dim;
        SpanNerModel {
            embedding: HashEmbedding::attach(&store, spec),
            encoder: BiLstm::attach(&store, "encoder", d, d),
            proj: Linear::attach(&store, "proj"),
            type_ffn: Ffn2::attach(&store, "type_ffn"),
            span_w_start: store.id("span_ffn.w1_start").expect("span w1_start"),
            span_w_end: store.id("span_ffn.w1_end").expect("span w1_end"),
            span_b1: store.id("span_ffn.b1").expect("span b1"),
            span_l2: Linear::attach(&store, "span_ffn.l2"),
            ent_embed: store.id("special.ent").expect("ent embed"),
            sep_embed: store.id("special.sep").expect("sep embed"),
            config,
            store,
            train_manifest: Vec::new(),
        }
    }

    /// Parameters in the encoder learning-rate group (the token
    /// representation tables); everything else trains at the "others" rate.
    pub fn is_encoder_param(&self, id: ParamId) -> bool {
        self.store.name(id).starts_with("embedding.")
    }

    /// Encode an example into type representations p (M x D, rows at the
    /// [ENT] positions) and token representations h (N x D).
    pub fn encode(&self, tape: &mut Tape<'_>, example: &SpanNerExample) -> Result<(NodeId, NodeId)> {
        let d = self.config.dim;
        let m = example.m();
        let n = example.n();

        let type_words: Vec<Option<&str>> = example
            .entity_types
            .iter()
            .map(|t| Some(t.as_str()))
            .collect();
        let text_words: Vec<Option<&str>> = example
            .text_tokens
            .iter()
            .map(|w| Some(w.as_str()))
            .collect();

        let mut parts: Vec<NodeId> = Vec::with_capacity(2 * m + 2);
        let type_embeds = if m > 0 {
            Some(self.embedding.embed(tape, &type_words)?)
        } else {
            None
        };
        for i in 0..m {
            let ent = tape.param(self.ent_embed);
            let type_row = tape.gather_rows(type_embeds.expect("m > 0"), vec![i])?;
            let marker = tape.add(ent, type_row)?;
            parts.push(marker);
            parts.push(type_row);
        }
        parts.push(tape.param(self.sep_embed));
        if n > 0 {
            parts.push(self.embedding.embed(tape, &text_words)?);
        }
        let seq = tape.concat_rows(&parts)?;

        let encoded = match self.config.encoder {
            EncoderMode::Identity => seq,
            EncoderMode::BiLstm => {
                let enc = self.encoder.run(tape, seq)?;
                self.proj.apply(tape, enc)?
            }
        };

        let ent_positions: Vec<usize> = (0..m).map(|i| 2 * i).collect();
        let p = tape.gather_rows(encoded, ent_positions)?;
        let text_positions: Vec<usize> = (2 * m + 1..2 * m + 1 + n).collect();
        let h = tape.gather_rows(encoded, text_positions)?;
        debug_assert_eq!(tape.value(p).dim(), (m, d));
        debug_assert_eq!(tape.value(h).dim(), (n, d));
        Ok((p, h))
    }

    /// Refined type representations q = FFN(p).
    pub fn type_reps(&self, tape: &mut Tape<'_>, p: NodeId) -> Result<NodeId> {
        Ok(self.type_ffn.apply(tape, p)?)
    }

    /// Span representations S for the given (start, end) list:
    /// FFN(h_i (+) h_j), with the first layer split into per-endpoint maps
    /// so each position is projected once instead of once per span.
    pub fn span_reps(
        &self,
        tape: &mut Tape<'_>,
        h: NodeId,
        spans: &[(usize, usize)],
    ) -> Result<NodeId> {
        let w_start = tape.param(self.span_w_start);
        let w_end = tape.param(self.span_w_end);
        let hs = tape.matmul(h, w_start)?;
        let he = tape.matmul(h, w_end)?;
        let starts: Vec<usize> = spans.iter().map(|&(i, _)| i).collect();
        let ends: Vec<usize> = spans.iter().map(|&(_, j)| j).collect();
        let gs = tape.gather_rows(hs, starts)?;
        let ge = tape.gather_rows(he, ends)?;
        let pre = tape.add(gs, ge)?;
        let b1 = tape.param(self.span_b1);
        let pre = tape.add_row(pre, b1)?;
        let a = tape.relu(pre);
        Ok(self.span_l2.apply(tape, a)?)
    }

    /// Raw match logits S . q^T (spans x M); sigmoid gives phi.
    pub fn match_logits(&self, tape: &mut Tape<'_>, s: NodeId, q: NodeId) -> Result<NodeId> {
        let qt = tape.transpose(q);
        Ok(tape.matmul(s, qt)?)
    }

    /// Score one (i, j, t) triple: phi = sigmoid(S_ij . q_t).
    pub fn score(&self, example: &SpanNerExample, i: usize, j: usize, t: usize) -> Result<f64> {
        let n = example.n();
        if t >= example.m() || i > j || j >= n {
            return Err(SpanNerError::IndexOutOfRange(format!("({i},{j},{t})")));
        }
        if j - i + 1 > self.config.max_span_width {
            return Err(SpanNerError::IndexOutOfRange(format!(
                "span width {} exceeds {}",
                j - i + 1,
                self.config.max_span_width
            )));
        }
        let mut tape = Tape::new(&self.store);
        let (p, h) = self.encode(&mut tape, example)?;
        let q = self.type_reps(&mut tape, p)?;
        let s = self.span_reps(&mut tape, h, &[(i, j)])?;
        let logits = self.match_logits(&mut tape, s, q)?;
        Ok(sigmoid(tape.value(logits)[[0, t]]))
    }

    /// Dense phi matrix over all spans x prompted types (eval mode).
    pub fn score_all(
        &self,
        example: &SpanNerExample,
    ) -> Result<(Vec<(usize, usize)>, Array2<f64>)> {
        let spans = enumerate_spans(example.n(), self.config.max_span_width);
        if spans.is_empty() || example.m() == 0 {
            return Ok((spans, Array2::zeros((0, example.m()))));
        }
        let mut tape = Tape::new(&self.store);
        let (p, h) = self.encode(&mut tape, example)?;
        let q = self.type_reps(&mut tape, p)?;
        let s = self.span_reps(&mut tape, h, &spans)?;
        let logits = self.match_logits(&mut tape, s, q)?;
        Ok((spans, tape.value(logits).mapv(sigmoid)))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let hyper = serde_json::json!({
            "model": "span_ner",
            "config": self.config,
            "embedding_spec": self.embedding.spec,
            "train_manifest": self.train_manifest,
        });
        checkpoint::save(&self.store, &hyper, path)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<SpanNerModel> {
        let (store, hyper) = checkpoint::load(path)?;
        let meta = |key: &str| {
            hyper
                .get(key)
                .cloned()
                .ok_or_else(|| SpanNerError::Metadata(format!("missing {key}")))
        };
        let config: SpanNerConfig = serde_json::from_value(meta("config")?)
            .map_err(|e| SpanNerError::Metadata(e.to_string()))?;
        let spec: HashEmbeddingSpec = serde_json::from_value(meta("embedding_spec")?)
            .map_err(|e| SpanNerError::Metadata(e.to_string()))?;
        let manifest: Vec<String> = serde_json::from_value(meta("train_manifest")?)
            .map_err(|e| SpanNerError::Metadata(e.to_string()))?;
        let mut model = SpanNerModel::attach(config, store, spec);
        model.train_manifest = manifest;
        Ok(model)
    }
}

/// All spans (i, j), inclusive ends, with width at most `k`, in
/// lexicographic order.
pub fn enumerate_spans(n: usize, k: usize) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    for i in 0..n {
        for j in i..n.min(i + k) {
            spans.push((i, j));
        }
    }
    spans
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Convenience for tests and training: the example for a tokenized page.
pub fn example_for_tokens(tokens: &[&str], types: &[EntityType]) -> SpanNerExample {
    SpanNerExample {
        page_id: String::new(),
        entity_types: types.to_vec(),
        text_tokens: tokens.iter().map(|s| s.to_string()).collect(),
        gold: Vec::new(),
        truncated: false,
    }
}
