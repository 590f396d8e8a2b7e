//! Unified span-NER input: entity-type prompts marked with [ENT], one [SEP]
//! delimiter, then the text tokens; gold spans in text-token coordinates.

use dnm_core::EntityType;

use crate::align::AnnotatedListing;
use crate::{DatasetError, Result};

pub const MAX_TYPES: usize = 25;
pub const MAX_LEN: usize = 3000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnifiedToken<'a> {
    Ent,
    Sep,
    Text(&'a str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanNerExample {
    pub page_id: String,
    /// Prompted entity types, in prompt order (M entries).
    pub entity_types: Vec<EntityType>,
    /// Text tokens (N entries, at most MAX_LEN).
    pub text_tokens: Vec<String>,
    /// Gold spans as (tok_start, tok_end inclusive, type index into
    /// `entity_types`). Spans of unprompted types are dropped.
    pub gold: Vec<(usize, usize, usize)>,
    pub truncated: bool,
}

impl SpanNerExample {
    pub fn m(&self) -> usize {
        self.entity_types.len()
    }

    pub fn n(&self) -> usize {
        self.text_tokens.len()
    }

    /// The full input sequence: [ENT] t_0 [ENT] t_1 ... [SEP] w_0 w_1 ...
    pub fn unified_tokens(&self) -> Vec<UnifiedToken<'_>> {
        let mut toks = Vec::with_capacity(2 * self.m() + 1 + self.n());
        for t in &self.entity_types {
            toks.push(UnifiedToken::Ent);
            toks.push(UnifiedToken::Text(t.as_str()));
        }
        toks.push(UnifiedToken::Sep);
        toks.extend(self.text_tokens.iter().map(|w| UnifiedToken::Text(w)));
        toks
    }
}

/// Build the span input for a listing against a type prompt list.
pub fn to_span_input(
    listing: &AnnotatedListing,
    types: &[EntityType],
) -> Result<SpanNerExample> {
    if types.len() > MAX_TYPES {
        return Err(DatasetError::TooManyTypes(types.len()));
    }
    let truncated = listing.tokens.len() > MAX_LEN;
    let n = listing.tokens.len().min(MAX_LEN);
    let gold = listing
        .spans
        .iter()
        .filter(|s| s.tok_end < n)
        .filter_map(|s| {
            types
                .iter()
                .position(|&t| t == s.entity_type)
                .map(|ti| (s.tok_start, s.tok_end, ti))
        })
        .collect();
    Ok(SpanNerExample {
        page_id: listing.page_id.clone(),
        entity_types: types.to_vec(),
        text_tokens: listing.tokens[..n].to_vec(),
        gold,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::TokenSpan;
    use dnm_core::{Language, MarketId};

    fn listing() -> AnnotatedListing {
        AnnotatedListing {
            page_id: "p0".into(),
            market_id: MarketId::AgarthaItem,
            language: Language::En,
            tokens: "alice sells 10g hash".split(' ').map(String::from).collect(),
            spans: vec![
                TokenSpan {
                    entity_type: EntityType::VendorName,
                    tok_start: 0,
                    tok_end: 0,
                    surface: "alice".into(),
                },
                TokenSpan {
                    entity_type: EntityType::Product,
                    tok_start: 2,
                    tok_end: 3,
                    surface: "10g hash".into(),
                },
            ],
        }
    }

    #[test]
    fn unified_layout_matches_the_prompt_format() {
        let ex = to_span_input(&listing(), &[EntityType::Product, EntityType::VendorName])
            .unwrap();
        let toks = ex.unified_tokens();
        use UnifiedToken::*;
        assert_eq!(
            toks,
            vec![
                Ent,
                Text("product"),
                Ent,
                Text("vendor_name"),
                Sep,
                Text("alice"),
                Text("sells"),
                Text("10g"),
                Text("hash"),
            ]
        );
        // gold re-indexed to prompt order
        assert_eq!(ex.gold, vec![(0, 0, 1), (2, 3, 0)]);
    }

    #[test]
    fn empty_type_list_keeps_sep_and_drops_gold() {
        let ex = to_span_input(&listing(), &[]).unwrap();
        assert_eq!(ex.unified_tokens()[0], UnifiedToken::Sep);
        assert!(ex.gold.is_empty());
    }

    #[test]
    fn more_than_max_types_is_an_error() {
        let types = vec![EntityType::Product; 26];
        assert!(matches!(
            to_span_input(&listing(), &types),
            Err(DatasetError::TooManyTypes(26))
        ));
    }

    #[test]
    fn gold_spans_round_trip_to_surfaces() {
        let l = listing();
        let ex = to_span_input(&l, &[EntityType::Product, EntityType::VendorName]).unwrap();
        for &(s, e, _) in &ex.gold {
            let detok = ex.text_tokens[s..=e].join(" ");
            assert!(l.spans.iter().any(|sp| sp.surface == detok));
        }
    }
}
