//! Train-split vocabulary: frequency-sorted word list, reserved ids
//! excluded (the embedding prepends padding and unknown slots).

use std::collections::BTreeMap;

/// Words of the training pages, most frequent first (ties lexicographic).
pub fn build_vocab<'a>(token_streams: impl Iterator<Item = &'a [String]>) -> Vec<String> {
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for tokens in token_streams {
        for tok in tokens {
            *freq.entry(tok).or_default() += 1;
        }
    }
    let mut words: Vec<(&str, usize)> = freq.into_iter().collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    words.into_iter().map(|(w, _)| w.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_then_lexicographic() {
        let a: Vec<String> = ["b", "a", "b", "c", "a", "b"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let vocab = build_vocab(std::iter::once(a.as_slice()));
        assert_eq!(vocab, vec!["b", "a", "c"]);
    }
}
