//! Model-ready dataset construction: char-to-token span alignment, the
//! conversation-style instruction export, the [ENT]/[SEP] unified span
//! input, deterministic stratified splits, and fixed-length padding.

pub mod align;
pub mod conversation;
pub mod io;
pub mod pad;
pub mod span_input;
pub mod split;
pub mod vocab;

use thiserror::Error;

pub use align::{align_spans, AnnotatedListing, TokenSpan};
pub use conversation::{to_conversation, ConversationExample, ConversationTurn};
pub use io::{read_span_dataset, write_conversations, write_span_dataset};
pub use pad::{pad_truncate, Padded};
pub use span_input::{to_span_input, SpanNerExample, UnifiedToken, MAX_TYPES};
pub use split::{split, SplitManifest};
pub use vocab::build_vocab;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{page_id}: span {char_start}..{char_end} ({entity_type}) covers no token")]
    Alignment {
        page_id: String,
        entity_type: String,
        char_start: usize,
        char_end: usize,
    },

    #[error("too many entity types: {0} > {MAX_TYPES}", MAX_TYPES = span_input::MAX_TYPES)]
    TooManyTypes(usize),

    #[error("cannot split an empty corpus")]
    EmptyCorpus,

    #[error("io error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad record at {path}:{line}: {detail}")]
    Record {
        path: std::path::PathBuf,
        line: usize,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, DatasetError>;
