//! Market, language, and entity identifiers plus the ground-truth record
//! types shared across the generator, extractor, and evaluation stages.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Marketplace template identifier. Agartha has two distinct page layouts
/// (item and purchase views) with their own pattern sets, so each is its own
/// id. Palmetto is the held-out robustness market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarketId {
    AgarthaItem,
    AgarthaPurchase,
    Berlusconi,
    Cannahome,
    Cocorico,
    Darkmarket,
    Silkroad,
    Palmetto,
}

impl MarketId {
    pub const ALL: [MarketId; 8] = [
        MarketId::AgarthaItem,
        MarketId::AgarthaPurchase,
        MarketId::Berlusconi,
        MarketId::Cannahome,
        MarketId::Cocorico,
        MarketId::Darkmarket,
        MarketId::Silkroad,
        MarketId::Palmetto,
    ];

    /// The six in-domain markets used by the default training corpus, one
    /// template per marketplace.
    pub const DEFAULT_SIX: [MarketId; 6] = [
        MarketId::AgarthaItem,
        MarketId::Berlusconi,
        MarketId::Cannahome,
        MarketId::Cocorico,
        MarketId::Darkmarket,
        MarketId::Silkroad,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MarketId::AgarthaItem => "agartha_item",
            MarketId::AgarthaPurchase => "agartha_purchase",
            MarketId::Berlusconi => "berlusconi",
            MarketId::Cannahome => "cannahome",
            MarketId::Cocorico => "cocorico",
            MarketId::Darkmarket => "darkmarket",
            MarketId::Silkroad => "silkroad",
            MarketId::Palmetto => "palmetto",
        }
    }

    pub fn parse(s: &str) -> Result<MarketId> {
        MarketId::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| CoreError::validation(format!("unknown market id: {s:?}")))
    }

    /// Cocorico is the only French-language marketplace.
    pub fn language(&self) -> Language {
        match self {
            MarketId::Cocorico => Language::Fr,
            _ => Language::En,
        }
    }
}

impl std::fmt::Display for MarketId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    En,
    Fr,
}

impl Language {
    pub fn as_str(&self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Fr => "fr",
        }
    }
}

/// Extraction targets. The first eight are present on every in-domain
/// market; `Sku` and `Brand` exist only on the Palmetto robustness market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityType {
    MarketName,
    Product,
    Model,
    QuantityInStock,
    ProductPrice,
    ProductDescription,
    ProductViews,
    VendorName,
    Sku,
    Brand,
}

impl EntityType {
    pub const STANDARD: [EntityType; 8] = [
        EntityType::MarketName,
        EntityType::Product,
        EntityType::Model,
        EntityType::QuantityInStock,
        EntityType::ProductPrice,
        EntityType::ProductDescription,
        EntityType::ProductViews,
        EntityType::VendorName,
    ];

    pub const NOVEL: [EntityType; 2] = [EntityType::Sku, EntityType::Brand];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntityType::MarketName => "market_name",
            EntityType::Product => "product",
            EntityType::Model => "model",
            EntityType::QuantityInStock => "quantity_in_stock",
            EntityType::ProductPrice => "product_price",
            EntityType::ProductDescription => "product_description",
            EntityType::ProductViews => "product_views",
            EntityType::VendorName => "vendor_name",
            EntityType::Sku => "sku",
            EntityType::Brand => "brand",
        }
    }

    pub fn parse(s: &str) -> Result<EntityType> {
        EntityType::STANDARD
            .iter()
            .chain(EntityType::NOVEL.iter())
            .copied()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| CoreError::validation(format!("unknown entity type: {s:?}")))
    }
}

impl std::fmt::Display for EntityType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One manifest record per page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRecord {
    pub page_id: String,
    pub url: String,
    pub market_id: MarketId,
    pub language: Language,
}

/// One ground-truth record per entity occurrence. Char offsets index into
/// the raw HTML of the page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthEntity {
    pub page_id: String,
    pub entity_type: EntityType,
    pub char_start: usize,
    pub char_end: usize,
    pub surface: String,
}

/// A labeled span in normalized page text. Offsets are byte offsets into
/// the UTF-8 text (the corpus is ASCII apart from French accents and the
/// euro sign, which always travel whole).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanAnnotation {
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub char_start: usize,
    pub char_end: usize,
    pub surface: String,
}

/// One annotated-corpus record: normalized text plus its labeled entities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedPage {
    pub page_id: String,
    pub market_id: MarketId,
    pub language: Language,
    pub text: String,
    pub entities: Vec<SpanAnnotation>,
}

/// A model-predicted span in token coordinates (inclusive end).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedSpan {
    pub start: usize,
    pub end: usize,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub score: f64,
}

/// One prediction-dump record, the wire format the evaluator accepts from
/// both in-repo models and external systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub page_id: String,
    pub spans: Vec<PredictedSpan>,
}

/// A generated marketplace page together with its authoritative entities.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthListing {
    pub page_id: String,
    pub url: String,
    pub market_id: MarketId,
    pub language: Language,
    pub html: String,
    pub entities: Vec<GroundTruthEntity>,
}

impl GroundTruthListing {
    /// Check the structural invariants: ranges in bounds, surface equals the
    /// substring at the range, and no two entities of the same type overlap.
    pub fn validate(&self) -> Result<()> {
        for e in &self.entities {
            if e.char_end > self.html.len() || e.char_start >= e.char_end {
                return Err(CoreError::validation(format!(
                    "{}: bad range {}..{} for {}",
                    self.page_id, e.char_start, e.char_end, e.entity_type
                )));
            }
            let got = &self.html[e.char_start..e.char_end];
            if got != e.surface {
                return Err(CoreError::validation(format!(
                    "{}: surface mismatch for {}: {:?} != {:?}",
                    self.page_id, e.entity_type, got, e.surface
                )));
            }
        }
        for (i, a) in self.entities.iter().enumerate() {
            for b in self.entities.iter().skip(i + 1) {
                if a.entity_type == b.entity_type
                    && a.char_start < b.char_end
                    && b.char_start < a.char_end
                {
                    return Err(CoreError::validation(format!(
                        "{}: overlapping {} spans",
                        self.page_id, a.entity_type
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn record(&self) -> PageRecord {
        PageRecord {
            page_id: self.page_id.clone(),
            url: self.url.clone(),
            market_id: self.market_id,
            language: self.language,
        }
    }
}
