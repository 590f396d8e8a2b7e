//! Shared domain types for the darknet-market listing pipeline: market and
//! entity identifiers, the on-disk corpus layout, and a minimal HTML
//! tokenizer used by both the text extractor and the crawler's link
//! harvester.

pub mod corpus;
pub mod error;
pub mod html;
pub mod types;

pub use error::{CoreError, Result};
pub use types::{
    AnnotatedPage, EntityType, GroundTruthEntity, GroundTruthListing, Language, MarketId,
    PageRecord, PredictedSpan, PredictionRecord, SpanAnnotation,
};
