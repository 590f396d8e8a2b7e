//! HTML-to-text conversion, string normalization, and per-market regex
//! labeling: turns raw listing pages into the annotated corpus and checks
//! labeling accuracy against generator ground truth.

pub mod label;
pub mod normalize;
pub mod patterns;
pub mod stats;

use thiserror::Error;

pub use label::{apply_patterns, verify_labels, LabelingReport, MarketTypeStats};
pub use normalize::{html_to_text, normalize, tokenize_with_offsets, NormalizedDoc, Token};
pub use patterns::{CompiledPatterns, PatternSpec, PatternSet};
pub use stats::{corpus_stats, CorpusStats};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("no pattern set for market {0}")]
    MissingMarket(dnm_core::MarketId),

    #[error("pattern for {market}/{entity} failed to compile: {source}")]
    BadPattern {
        market: dnm_core::MarketId,
        entity: dnm_core::EntityType,
        #[source]
        source: fancy_regex::Error,
    },

    #[error("page id mismatch: {0}")]
    PageIdMismatch(String),
}

pub type Result<T> = std::result::Result<T, ExtractError>;
