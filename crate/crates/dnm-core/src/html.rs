//! Minimal HTML tokenizer for the small fixed tag set the corpus uses.
//!
//! This is a best-effort scanner, not a conforming parser: it splits input
//! into text runs and tags, decodes nothing, and never fails. Malformed
//! markup (unclosed tags, stray `<`) degrades to text.

/// A single scan event. Tag names are lowercased; attribute values keep
/// their original text.
#[derive(Debug, Clone, PartialEq)]
pub enum HtmlEvent<'a> {
    Text(&'a str),
    Open {
        name: String,
        attrs: Vec<(String, String)>,
    },
    Close {
        name: String,
    },
}

/// Tags whose boundaries separate words when flattening to text.
pub fn is_block_tag(name: &str) -> bool {
    matches!(name, "html" | "body" | "div" | "table" | "p" | "br" | "tr" | "td")
}

/// Tokenize `html` into text and tag events.
pub fn tokenize(html: &str) -> Vec<HtmlEvent<'_>> {
    let bytes = html.as_bytes();
    let mut events = Vec::new();
    let mut pos = 0;

    while pos < bytes.len() {
        match find_byte(bytes, pos, b'<') {
            None => {
                events.push(HtmlEvent::Text(&html[pos..]));
                break;
            }
            Some(lt) => {
                if lt > pos {
                    events.push(HtmlEvent::Text(&html[pos..lt]));
                }
                match find_byte(bytes, lt + 1, b'>') {
                    None => {
                        // Unterminated tag: treat the remainder as text.
                        events.push(HtmlEvent::Text(&html[lt..]));
                        break;
                    }
                    Some(gt) => {
                        if let Some(ev) = parse_tag(&html[lt + 1..gt]) {
                            events.push(ev);
                        }
                        pos = gt + 1;
                        continue;
                    }
                }
            }
        }
    }
    events
}

fn find_byte(bytes: &[u8], from: usize, needle: u8) -> Option<usize> {
    bytes[from..].iter().position(|&b| b == needle).map(|i| from + i)
}

fn parse_tag(inner: &str) -> Option<HtmlEvent<'static>> {
    let inner = inner.trim();
    if inner.is_empty() || inner.starts_with('!') || inner.starts_with('?') {
        return None; // comments, doctype
    }
    if let Some(rest) = inner.strip_prefix('/') {
        let name = rest
            .split_whitespace()
            .next()
            .unwrap_or("")
            .to_ascii_lowercase();
        return Some(HtmlEvent::Close { name });
    }
    let inner = inner.strip_suffix('/').unwrap_or(inner);
    let mut chars = inner.char_indices();
    let name_end = chars
        .find(|(_, c)| c.is_whitespace())
        .map(|(i, _)| i)
        .unwrap_or(inner.len());
    let name = inner[..name_end].to_ascii_lowercase();
    let attrs = parse_attrs(&inner[name_end..]);
    Some(HtmlEvent::Open { name, attrs })
}

fn parse_attrs(s: &str) -> Vec<(String, String)> {
    let mut attrs = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let key_start = i;
        while i < bytes.len() && bytes[i] != b'=' && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i == key_start {
            break;
        }
        let key = s[key_start..i].to_ascii_lowercase();
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'=' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'"' || bytes[i] == b'\'') {
                let quote = bytes[i];
                i += 1;
                let val_start = i;
                while i < bytes.len() && bytes[i] != quote {
                    i += 1;
                }
                attrs.push((key, s[val_start..i].to_string()));
                i = (i + 1).min(bytes.len());
            } else {
                let val_start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                attrs.push((key, s[val_start..i].to_string()));
            }
        } else {
            attrs.push((key, String::new()));
        }
    }
    attrs
}
