//! Per-market regex pattern registry.
//!
//! Patterns match against lowercased, symbol-stripped, space-collapsed text
//! (see `normalize`). Several published patterns carry obvious typographical
//! corruption (a dropped `\` or a stray space); the shipped form is the
//! smallest edit that compiles and restores the evident intent, and the
//! published original is kept verbatim in `as_published` for audit.
//! Group 0 means the whole match is the label.

use std::collections::BTreeMap;

use dnm_core::{EntityType, MarketId};
use fancy_regex::Regex;

use crate::{ExtractError, Result};

/// One entity pattern for one market.
#[derive(Debug, Clone, Copy)]
pub struct PatternSpec {
    pub entity_type: EntityType,
    pub pattern: &'static str,
    pub group: usize,
    /// The published pattern text, verbatim, where it differs from `pattern`.
    pub as_published: Option<&'static str>,
}

const fn spec(entity_type: EntityType, pattern: &'static str, group: usize) -> PatternSpec {
    PatternSpec {
        entity_type,
        pattern,
        group,
        as_published: None,
    }
}

const fn fixed(
    entity_type: EntityType,
    pattern: &'static str,
    group: usize,
    as_published: &'static str,
) -> PatternSpec {
    PatternSpec {
        entity_type,
        pattern,
        group,
        as_published: Some(as_published),
    }
}

use EntityType::*;

const AGARTHA_ITEM: [PatternSpec; 8] = [
    spec(MarketName, r"(\w+)\s+purchase", 1),
    spec(Product, r"(?:listings.*?)1listings\s+(.+?)\s+message", 1),
    spec(Model, r"category\s+(\w+)", 1),
    spec(QuantityInStock, r"availability (\d+)", 1),
    spec(ProductPrice, r"price (\d+\.\d+)", 1),
    spec(ProductDescription, r"listings (.+?) purchase", 1),
    spec(ProductViews, r"(\d+)\s+\d+,\d+\s?€", 1),
    spec(VendorName, r"vendor\s+(\w+)", 1),
];

const AGARTHA_PURCHASE: [PatternSpec; 8] = [
    spec(MarketName, r"(\w+)\s+purchase", 1),
    spec(Product, r"(?:purchase.*?)1purchase\s+(.+?)\s+category", 1),
    spec(Model, r"category\s+(\w+)", 1),
    spec(QuantityInStock, r"availability (\d+)", 1),
    spec(ProductPrice, r"(\d+\.\d+)\s+(usd|btc)", 1),
    spec(ProductDescription, r"listings (.+?) purchase", 1),
    spec(ProductViews, r"(\d+)\s+\d+,\d+\s?€", 1),
    spec(VendorName, r"vendor\s+(\w+)", 1),
];

const BERLUSCONI: [PatternSpec; 8] = [
    fixed(MarketName, r"\bberlusconi\b", 0, r"\berlusconi\b"),
    fixed(
        Product,
        r"^(.+?)\s\d+(?:\.\d+)?\s*eur",
        1,
        r"$^(.+?)$\s\d+(?:\.\d+)?\s*eur",
    ),
    spec(Model, r"class\s+(\w+)", 1),
    fixed(QuantityInStock, r"(\d+)\s+in stock", 1, r"(\d+) s+in stock"),
    spec(ProductPrice, r"(\d+(?:\.\d+)?)(?=\s+eur)", 1),
    spec(ProductDescription, r"avis (.+?) modèle", 1),
    spec(ProductViews, r"(\d+)\s+\d+,\d+\s?€", 1),
    spec(VendorName, r"vendor\s+(\w+)", 1),
];

const CANNAHOME: [PatternSpec; 8] = [
    spec(MarketName, r"(\w+)\s+purchase", 1),
    spec(Product, r"details (.+?) availability", 1),
    spec(Model, r"category\s+(\w+)", 1),
    spec(QuantityInStock, r"availability (\d+)", 1),
    spec(ProductPrice, r"escrow (\d+.\d+)", 1),
    spec(ProductDescription, r"avis (.+?) modèle", 1),
    spec(ProductViews, r"(\w+)\s+orders", 1),
    spec(VendorName, r"vendor\s+(\w+)", 1),
];

const COCORICO: [PatternSpec; 8] = [
    fixed(MarketName, r"\bcocorico\smarket\b", 0, r"\bcocorico\s market\b"),
    spec(Product, r"recherche (.+?) description", 1),
    spec(Model, r"modèle\s+(.+?)\s+disponibilité", 1),
    // Normalization strips the colon of the French "disponibilité : N".
    fixed(QuantityInStock, r"disponibilité (\d+)", 1, r"disponibilité :(\d+)"),
    fixed(ProductPrice, r"(\d+,\d+)\s?€", 1, r"(\d+, d+)\s?€"),
    spec(ProductDescription, r"avis (.+?) modèle", 1),
    spec(ProductViews, r"(\d+)\s+\d+,\d+\s?€", 1),
    spec(VendorName, r"(\b\w+\b)\s+rating", 1),
];

const DARKMARKET: [PatternSpec; 8] = [
    spec(MarketName, r"(\w+)\s+purchase", 1),
    spec(Product, r"1 (.+?) quality", 1),
    spec(Model, r"type\s+(\w+)", 1),
    spec(QuantityInStock, r"leftsold (\d+)", 1),
    spec(ProductPrice, r"offers (\d+\.+\d+)", 1),
    spec(ProductDescription, r"listings (.+?) quality", 1),
    spec(ProductViews, r"(\d+)\s+\d+,\d+\s?€", 1),
    spec(VendorName, r"information\s+(\w+)", 1),
];

const SILKROAD: [PatternSpec; 8] = [
    fixed(MarketName, r"\bsilk\sroad\b", 0, r"\bsilk\s road\b"),
    fixed(Product, r"usd\s+(.+?)\s+price", 1, r"usd+(.+?)\s+price"),
    fixed(Model, r"category\s+(.+?)\s+stock", 1, r"category+(.+?)\s+stock"),
    spec(QuantityInStock, r"remaining\s*(\d+)", 1),
    fixed(ProductPrice, r"price\s*(\d+)", 1, r"price s*(\d+)"),
    spec(ProductDescription, r"avis (.+?) modèle", 1),
    spec(ProductViews, r"(\d+)\s+\d+,\d+\s?€", 1),
    spec(VendorName, r"listings\s+(\w+)", 1),
];

/// Palmetto is the unseen robustness market; no published patterns exist, so
/// these follow the same keyword-anchored style. Price and category reuse
/// anchors common on the in-domain markets; the rest, including the novel
/// sku and brand entities, use firearms-store wording.
const PALMETTO: [PatternSpec; 10] = [
    spec(MarketName, r"\bpalmetto\sarmory\b", 0),
    spec(Product, r"item (.+?) specifications", 1),
    spec(Model, r"category\s+(\w+)", 1),
    spec(QuantityInStock, r"inventory\s+(\d+)", 1),
    spec(ProductPrice, r"price (\d+\.\d+)", 1),
    spec(ProductDescription, r"overview (.+?) shipping", 1),
    spec(ProductViews, r"viewed\s+(\d+)\s+times", 1),
    spec(VendorName, r"seller\s+(\w+)", 1),
    spec(Sku, r"sku ([a-z0-9-]+)", 1),
    spec(Brand, r"brand\s+(\w+)", 1),
];

/// The full market -> entity -> pattern registry.
#[derive(Debug, Clone)]
pub struct PatternSet {
    by_market: BTreeMap<MarketId, Vec<PatternSpec>>,
}

impl Default for PatternSet {
    fn default() -> Self {
        let mut by_market = BTreeMap::new();
        by_market.insert(MarketId::AgarthaItem, AGARTHA_ITEM.to_vec());
        by_market.insert(MarketId::AgarthaPurchase, AGARTHA_PURCHASE.to_vec());
        by_market.insert(MarketId::Berlusconi, BERLUSCONI.to_vec());
        by_market.insert(MarketId::Cannahome, CANNAHOME.to_vec());
        by_market.insert(MarketId::Cocorico, COCORICO.to_vec());
        by_market.insert(MarketId::Darkmarket, DARKMARKET.to_vec());
        by_market.insert(MarketId::Silkroad, SILKROAD.to_vec());
        by_market.insert(MarketId::Palmetto, PALMETTO.to_vec());
        PatternSet { by_market }
    }
}

impl PatternSet {
    pub fn markets(&self) -> impl Iterator<Item = MarketId> + '_ {
        self.by_market.keys().copied()
    }

    pub fn specs(&self, market: MarketId) -> Option<&[PatternSpec]> {
        self.by_market.get(&market).map(|v| v.as_slice())
    }

    /// Compile every pattern once up front.
    pub fn compile(&self) -> Result<CompiledPatterns> {
        let mut by_market = BTreeMap::new();
        for (&market, specs) in &self.by_market {
            let mut compiled = Vec::with_capacity(specs.len());
            for spec in specs {
                let re = Regex::new(spec.pattern).map_err(|source| ExtractError::BadPattern {
                    market,
                    entity: spec.entity_type,
                    source,
                })?;
                compiled.push((spec.entity_type, re, spec.group));
            }
            by_market.insert(market, compiled);
        }
        Ok(CompiledPatterns { by_market })
    }
}

/// Compiled form of a [`PatternSet`].
#[derive(Debug)]
pub struct CompiledPatterns {
    by_market: BTreeMap<MarketId, Vec<(EntityType, Regex, usize)>>,
}

impl CompiledPatterns {
    pub fn for_market(&self, market: MarketId) -> Option<&[(EntityType, Regex, usize)]> {
        self.by_market.get(&market).map(|v| v.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_pattern_compiles() {
        PatternSet::default().compile().unwrap();
    }

    #[test]
    fn every_market_covers_the_standard_entities() {
        let set = PatternSet::default();
        for market in MarketId::ALL {
            let specs = set.specs(market).unwrap();
            for entity in EntityType::STANDARD {
                assert!(
                    specs.iter().any(|s| s.entity_type == entity),
                    "{market} missing {entity}"
                );
            }
        }
        let palmetto = set.specs(MarketId::Palmetto).unwrap();
        for entity in EntityType::NOVEL {
            assert!(palmetto.iter().any(|s| s.entity_type == entity));
        }
    }
}
