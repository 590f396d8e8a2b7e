//! Line-delimited JSON dataset files.
//!
//! Span dataset: `{"id", "tokens": [...], "ner": [[start, end, "type"]...]}`
//! with inclusive token ends. Conversation export:
//! `{"id", "conversations": [{"from", "value"}...]}`.

use std::fs;
use std::io::Write;
use std::path::Path;

use dnm_core::EntityType;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::align::{AnnotatedListing, TokenSpan};
use crate::conversation::ConversationExample;
use crate::{DatasetError, Result};

#[derive(Debug, Serialize, Deserialize)]
struct SpanRecord {
    id: String,
    tokens: Vec<String>,
    ner: Vec<(usize, usize, String)>,
}

fn io_err(path: &Path, source: std::io::Error) -> DatasetError {
    DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_span_dataset(path: &Path, listings: &[AnnotatedListing]) -> Result<()> {
    let mut out = Vec::new();
    for l in listings {
        let rec = SpanRecord {
            id: l.page_id.clone(),
            tokens: l.tokens.clone(),
            ner: l
                .spans
                .iter()
                .map(|s| (s.tok_start, s.tok_end, s.entity_type.to_string()))
                .collect(),
        };
        serde_json::to_writer(&mut out, &rec).expect("serializable record");
        out.push(b'\n');
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Read a span dataset back; market and language are recovered from the
/// page-id prefix (`<market>-NNNN`).
pub fn read_span_dataset(path: &Path) -> Result<Vec<AnnotatedListing>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut listings = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |detail: String| DatasetError::Record {
            path: path.to_path_buf(),
            line: idx + 1,
            detail,
        };
        let rec: SpanRecord = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let market = rec
            .id
            .rsplit_once('-')
            .and_then(|(prefix, _)| dnm_core::MarketId::parse(prefix).ok())
            .ok_or_else(|| bad(format!("page id {:?} has no market prefix", rec.id)))?;
        let mut spans = Vec::with_capacity(rec.ner.len());
        for (s, e, ty) in rec.ner {
            if s > e || e >= rec.tokens.len() {
                return Err(bad(format!("span {s}..={e} out of {} tokens", rec.tokens.len())));
            }
            spans.push(TokenSpan {
                entity_type: EntityType::parse(&ty).map_err(|e| bad(e.to_string()))?,
                tok_start: s,
                tok_end: e,
                surface: rec.tokens[s..=e].join(" "),
            });
        }
        listings.push(AnnotatedListing {
            page_id: rec.id,
            market_id: market,
            language: market.language(),
            tokens: rec.tokens,
            spans,
        });
    }
    Ok(listings)
}

pub fn write_conversations(path: &Path, examples: &[ConversationExample]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    for ex in examples {
        let rec = json!({ "id": ex.page_id, "conversations": ex.wire_turns() });
        serde_json::to_writer(&mut f, &rec).expect("serializable record");
        f.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    Ok(())
}
