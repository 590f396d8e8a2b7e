//! Char-span to token-span alignment over whitespace tokenization.

use dnm_core::{AnnotatedPage, EntityType, Language, MarketId, SpanAnnotation};
use serde::{Deserialize, Serialize};

use crate::{DatasetError, Result};

/// An entity span in token coordinates; `tok_end` is inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSpan {
    pub entity_type: EntityType,
    pub tok_start: usize,
    pub tok_end: usize,
    pub surface: String,
}

/// A tokenized page with aligned entity spans, the unit of model data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedListing {
    pub page_id: String,
    pub market_id: MarketId,
    pub language: Language,
    pub tokens: Vec<String>,
    pub spans: Vec<TokenSpan>,
}

impl AnnotatedListing {
    /// Tokenize an annotated page and align its char spans. Span surfaces
    /// are re-derived from the covering tokens, so a char span that starts
    /// or ends mid-token (possible on noisy labels) widens to token
    /// boundaries and the invariant surface == detokenized span holds.
    pub fn from_page(page: &AnnotatedPage) -> Result<AnnotatedListing> {
        let token_offsets: Vec<(usize, usize)> = tokenize_offsets(&page.text);
        let tokens: Vec<String> = token_offsets
            .iter()
            .map(|&(s, e)| page.text[s..e].to_string())
            .collect();
        let mut spans = align_spans(&page.page_id, &page.entities, &token_offsets)?;
        for span in &mut spans {
            span.surface = tokens[span.tok_start..=span.tok_end].join(" ");
        }
        Ok(AnnotatedListing {
            page_id: page.page_id.clone(),
            market_id: page.market_id,
            language: page.language,
            tokens,
            spans,
        })
    }
}

fn tokenize_offsets(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c == ' ' {
            if let Some(s) = start.take() {
                out.push((s, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, text.len()));
    }
    out
}

/// Map char spans onto token spans: the span starts at the token containing
/// `char_start` and ends at the token containing `char_end - 1`. A span that
/// covers no token is an alignment error naming the page.
pub fn align_spans(
    page_id: &str,
    entities: &[SpanAnnotation],
    token_offsets: &[(usize, usize)],
) -> Result<Vec<TokenSpan>> {
    let mut spans = Vec::with_capacity(entities.len());
    for e in entities {
        let containing = |pos: usize| {
            token_offsets
                .iter()
                .position(|&(s, end)| pos >= s && pos < end)
        };
        let (start_tok, end_tok) = match (
            containing(e.char_start),
            e.char_end.checked_sub(1).and_then(containing),
        ) {
            (Some(a), Some(b)) if a <= b => (a, b),
            _ => {
                return Err(DatasetError::Alignment {
                    page_id: page_id.to_string(),
                    entity_type: e.entity_type.to_string(),
                    char_start: e.char_start,
                    char_end: e.char_end,
                })
            }
        };
        spans.push(TokenSpan {
            entity_type: e.entity_type,
            tok_start: start_tok,
            tok_end: end_tok,
            surface: e.surface.clone(),
        });
    }
    Ok(spans)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(ty: EntityType, s: usize, e: usize, surface: &str) -> SpanAnnotation {
        SpanAnnotation {
            entity_type: ty,
            char_start: s,
            char_end: e,
            surface: surface.into(),
        }
    }

    #[test]
    fn single_token_span() {
        let text = "price 12.50 usd";
        let offsets = tokenize_offsets(text);
        let spans = align_spans(
            "p",
            &[ann(EntityType::ProductPrice, 6, 11, "12.50")],
            &offsets,
        )
        .unwrap();
        assert_eq!((spans[0].tok_start, spans[0].tok_end), (1, 1));
    }

    #[test]
    fn multi_token_span() {
        let text = "vendor sells 10g hash today";
        let offsets = tokenize_offsets(text);
        let start = text.find("10g").unwrap();
        let spans = align_spans(
            "p",
            &[ann(EntityType::Product, start, start + 8, "10g hash")],
            &offsets,
        )
        .unwrap();
        assert_eq!((spans[0].tok_start, spans[0].tok_end), (2, 3));
    }

    #[test]
    fn span_in_whitespace_is_an_error() {
        let offsets = tokenize_offsets("a  b"); // not produced by normalize, but align must not panic
        let err = align_spans("page-9", &[ann(EntityType::Product, 1, 2, " ")], &offsets)
            .unwrap_err();
        assert!(err.to_string().contains("page-9"));
    }
}
