//! Tag stripping and string normalization.
//!
//! The pipeline is: raw HTML -> `html_to_text` (drop tags, keep text-node
//! order, space at block boundaries, drop script/style) -> `normalize`
//! (lowercase, strip the noise symbols, collapse whitespace) ->
//! `tokenize_with_offsets`.

use dnm_core::html::{is_block_tag, tokenize, HtmlEvent};
use dnm_core::{Language, MarketId};
use serde::{Deserialize, Serialize};

/// A whitespace token with byte offsets into the normalized text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
}

/// Normalized page text plus its whitespace tokenization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedDoc {
    pub page_id: String,
    pub market_id: MarketId,
    pub language: Language,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl NormalizedDoc {
    pub fn from_html(page_id: &str, market_id: MarketId, html: &str) -> NormalizedDoc {
        let text = normalize(&html_to_text(html));
        let tokens = tokenize_with_offsets(&text);
        NormalizedDoc {
            page_id: page_id.to_string(),
            market_id,
            language: market_id.language(),
            text,
            tokens,
        }
    }
}

/// Flatten HTML to visible text. Script and style content is dropped, text
/// node order is preserved, and block-tag boundaries become single spaces so
/// words from adjacent blocks never fuse.
pub fn html_to_text(html: &str) -> String {
    let mut out = String::with_capacity(html.len() / 2);
    let mut skip_depth = 0usize;
    for event in tokenize(html) {
        match event {
            HtmlEvent::Text(t) => {
                if skip_depth == 0 {
                    out.push_str(t);
                }
            }
            HtmlEvent::Open { name, .. } => {
                if name == "script" || name == "style" {
                    skip_depth += 1;
                } else if is_block_tag(&name) {
                    out.push(' ');
                }
            }
            HtmlEvent::Close { name } => {
                if name == "script" || name == "style" {
                    skip_depth = skip_depth.saturating_sub(1);
                } else if is_block_tag(&name) {
                    out.push(' ');
                }
            }
        }
    }
    out
}

/// Symbols stripped during normalization.
const STRIPPED: [char; 4] = ['&', '*', ';', ':'];

/// Lowercase, drop the noise symbols, collapse whitespace runs to single
/// spaces, and trim. Idempotent.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.to_lowercase().chars() {
        if STRIPPED.contains(&c) {
            continue;
        }
        if c.is_whitespace() {
            pending_space = true;
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        out.push(c);
    }
    out
}

/// Split normalized text on spaces, keeping byte offsets. Offsets are
/// strictly increasing and index into the input string.
pub fn tokenize_with_offsets(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c == ' ' {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    surface: text[s..i].to_string(),
                    char_start: s,
                    char_end: i,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            surface: text[s..].to_string(),
            char_start: s,
            char_end: text.len(),
        });
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_tags_and_keeps_order() {
        assert_eq!(
            normalize(&html_to_text("<div>price <span>12.50</span></div>")),
            "price 12.50"
        );
        assert_eq!(html_to_text(""), "");
    }

    #[test]
    fn drops_script_and_style() {
        let html = "<div>a</div><script>var x = 1;</script><div>b</div><style>.x{}</style>";
        assert_eq!(normalize(&html_to_text(html)), "a b");
    }

    #[test]
    fn block_boundaries_become_spaces() {
        assert_eq!(normalize(&html_to_text("<div>a</div><div>b</div>")), "a b");
        // Inline tags add nothing.
        assert_eq!(normalize(&html_to_text("<span>a</span><span>b</span>")), "ab");
    }

    #[test]
    fn normalize_strips_symbols_and_lowercases() {
        assert_eq!(normalize("Price:  12.50  &  USD"), "price 12.50 usd");
        assert_eq!(normalize("a\t\tb\n c"), "a b c");
        assert_eq!(normalize("Stock*;42"), "stock42");
    }

    #[test]
    fn normalize_is_idempotent_on_samples() {
        for s in ["price 12.50 usd", "  A &B ;; C  ", "déjà Vu: *"] {
            let once = normalize(s);
            assert_eq!(normalize(&once), once);
        }
    }

    #[test]
    fn token_offsets_slice_back() {
        let text = "vendor alice price 12.50 €";
        for tok in tokenize_with_offsets(text) {
            assert_eq!(&text[tok.char_start..tok.char_end], tok.surface);
        }
        assert_eq!(tokenize_with_offsets("").len(), 0);
    }
}
