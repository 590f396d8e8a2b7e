//! Deterministic synthetic marketplace generator plus an in-process mock
//! market HTTP service, standing in for live darknet markets. Page templates
//! are co-designed with the extractor's pattern registry: on a noise-free
//! page every entity is recoverable exactly by its market's patterns.

pub mod generate;
pub mod service;
pub mod template;
pub mod vocab;

use thiserror::Error;

pub use generate::{entity_inventory, generate_corpus, Corpus, GenConfig, DEFAULT_NOISE_RATE};
pub use service::{serve as serve_market, MockMarket, ServiceHandle};

#[derive(Debug, Error)]
pub enum MarketSimError {
    #[error("unknown market id in config: {0:?}")]
    UnknownMarket(String),

    #[error("cannot serve an empty corpus")]
    EmptyCorpus,

    #[error("service failed to start on {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, MarketSimError>;
