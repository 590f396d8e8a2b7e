//! Trainable hash embedding: a word-vocabulary table plus character-n-gram
//! hash buckets, so unseen words still get a useful, deterministic vector.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::init;
use crate::params::{ParamId, ParamStore};
use crate::tape::{NodeId, Tape};

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;

/// Structural description of a hash embedding; stored in checkpoints so a
/// model is reloadable without the original corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashEmbeddingSpec {
    pub dim: usize,
    /// id -> word; ids 0 and 1 are reserved for padding and unknowns.
    pub vocab: Vec<String>,
    pub buckets: usize,
    pub hash_seed: u64,
    pub ngram: usize,
}

impl HashEmbeddingSpec {
    /// Build a spec from a training vocabulary (reserved slots prepended).
    pub fn from_words(
        words: impl IntoIterator<Item = String>,
        dim: usize,
        buckets: usize,
        hash_seed: u64,
    ) -> HashEmbeddingSpec {
        let mut vocab = vec!["<pad>".to_string(), "<unk>".to_string()];
        vocab.extend(words);
        HashEmbeddingSpec {
            dim,
            vocab,
            buckets,
            hash_seed,
            ngram: 3,
        }
    }
}

#[derive(Debug)]
pub struct HashEmbedding {
    pub spec: HashEmbeddingSpec,
    pub vocab_table: ParamId,
    pub ngram_table: ParamId,
    word_ids: BTreeMap<String, usize>,
}

impl HashEmbedding {
    /// Register the two tables. The padding row starts (and effectively
    /// stays) at zero: padded positions never receive gradient.
    pub fn new(store: &mut ParamStore, rng: &mut ChaCha8Rng, spec: HashEmbeddingSpec) -> Self {
        let mut vocab_table = init::normal(rng, spec.vocab.len(), spec.dim, 0.5);
        vocab_table.row_mut(PAD_ID).fill(0.0);
        let ngram_table = init::normal(rng, spec.buckets, spec.dim, 0.5);
        let word_ids = spec
            .vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        HashEmbedding {
            vocab_table: store.add("embedding.vocab", vocab_table),
            ngram_table: store.add("embedding.ngram", ngram_table),
            spec,
            word_ids,
        }
    }

    /// Rebuild from checkpointed tables.
    pub fn attach(store: &ParamStore, spec: HashEmbeddingSpec) -> Self {
        let word_ids = spec
            .vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        HashEmbedding {
            vocab_table: store.id("embedding.vocab").expect("vocab table"),
            ngram_table: store.id("embedding.ngram").expect("ngram table"),
            spec,
            word_ids,
        }
    }

    pub fn word_id(&self, word: &str) -> usize {
        self.word_ids.get(word).copied().unwrap_or(UNK_ID)
    }

    /// Character n-gram buckets of a word, boundary-marked.
    pub fn buckets_for(&self, word: &str) -> Vec<usize> {
        let marked: Vec<char> = std::iter::once('<')
            .chain(word.chars())
            .chain(std::iter::once('>'))
            .collect();
        let n = self.spec.ngram;
        if marked.len() <= n {
            return vec![self.bucket_of(&marked)];
        }
        marked.windows(n).map(|w| self.bucket_of(w)).collect()
    }

    fn bucket_of(&self, gram: &[char]) -> usize {
        let mut h = self.spec.hash_seed ^ 0xcbf2_9ce4_8422_2325;
        for c in gram {
            let mut buf = [0u8; 4];
            for &byte in c.encode_utf8(&mut buf).as_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x1_0000_0000_01b3);
            }
        }
        (h % self.spec.buckets as u64) as usize
    }

    /// Embed a token sequence: vocab row (UNK for unseen words) plus the
    /// mean of the word's n-gram bucket rows. `None` tokens are padding and
    /// embed to the zero row alone.
    pub fn embed(&self, tape: &mut Tape<'_>, tokens: &[Option<&str>]) -> crate::Result<NodeId> {
        let mut vocab_rows = Vec::with_capacity(tokens.len());
        let mut ngram_combos = Vec::with_capacity(tokens.len());
        for tok in tokens {
            match tok {
                None => {
                    vocab_rows.push(PAD_ID);
                    ngram_combos.push(Vec::new());
                }
                Some(word) => {
                    vocab_rows.push(self.word_id(word));
                    let buckets = self.buckets_for(word);
                    let w = 1.0 / buckets.len() as f64;
                    ngram_combos.push(buckets.into_iter().map(|b| (b, w)).collect());
                }
            }
        }
        let from_vocab = tape.param_rows(self.vocab_table, vocab_rows);
        let from_ngrams = tape.param_rows_weighted(self.ngram_table, ngram_combos);
        tape.add(from_vocab, from_ngrams)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn embedding() -> (ParamStore, HashEmbedding) {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = HashEmbeddingSpec::from_words(
            ["price".to_string(), "vendor".to_string()],
            8,
            16,
            42,
        );
        let emb = HashEmbedding::new(&mut store, &mut rng, spec);
        (store, emb)
    }

    #[test]
    fn unseen_words_get_deterministic_nonzero_vectors() {
        let (store, emb) = embedding();
        let mut tape = Tape::new(&store);
        let a = emb.embed(&mut tape, &[Some("zzz-unseen")]).unwrap();
        let b = emb.embed(&mut tape, &[Some("zzz-unseen")]).unwrap();
        assert_eq!(tape.value(a), tape.value(b));
        assert!(tape.value(a).iter().any(|&v| v != 0.0));
        // differs from another unseen word despite both mapping to UNK
        let c = emb.embed(&mut tape, &[Some("qqq-other")]).unwrap();
        assert_ne!(tape.value(a), tape.value(c));
    }

    #[test]
    fn padding_embeds_to_zero() {
        let (store, emb) = embedding();
        let mut tape = Tape::new(&store);
        let p = emb.embed(&mut tape, &[None]).unwrap();
        assert!(tape.value(p).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn known_words_use_their_vocab_row() {
        let (_store, emb) = embedding();
        assert_eq!(emb.word_id("price"), 2);
        assert_eq!(emb.word_id("missing"), UNK_ID);
        assert_eq!(emb.word_id("<pad>"), PAD_ID);
    }
}
