//! Deterministic corpus generation.

use std::collections::BTreeMap;

use dnm_core::{EntityType, GroundTruthListing, MarketId, PageRecord};
use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::template::{self, ListingValues, NoisePlan, PageBuilder};
use crate::vocab;
use crate::{MarketSimError, Result};

pub const DEFAULT_NOISE_RATE: f64 = 0.2;

/// Generator configuration: how many pages per market, the corpus seed, and
/// the fraction of pages that receive noise.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub counts: BTreeMap<MarketId, usize>,
    pub seed: u64,
    pub noise_rate: f64,
}

impl GenConfig {
    pub fn new(seed: u64) -> Self {
        GenConfig {
            counts: BTreeMap::new(),
            seed,
            noise_rate: DEFAULT_NOISE_RATE,
        }
    }

    /// The default corpus: the six in-domain markets at `pages` each.
    pub fn default_six(pages: usize, seed: u64) -> Self {
        let mut cfg = GenConfig::new(seed);
        for market in MarketId::DEFAULT_SIX {
            cfg.counts.insert(market, pages);
        }
        cfg
    }

    pub fn with_market(mut self, market: MarketId, pages: usize) -> Self {
        self.counts.insert(market, pages);
        self
    }

    pub fn with_noise(mut self, noise_rate: f64) -> Self {
        self.noise_rate = noise_rate;
        self
    }

    /// Parse string-keyed counts (config files, CLI); unknown market names
    /// are a configuration error.
    pub fn from_named_counts(
        counts: &BTreeMap<String, usize>,
        seed: u64,
        noise_rate: f64,
    ) -> Result<Self> {
        let mut cfg = GenConfig::new(seed).with_noise(noise_rate);
        for (name, &n) in counts {
            let market = MarketId::parse(name)
                .map_err(|_| MarketSimError::UnknownMarket(name.clone()))?;
            cfg.counts.insert(market, n);
        }
        Ok(cfg)
    }
}

/// A generated corpus: listings carry pages and ground truth; the manifest
/// is derived.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub listings: Vec<GroundTruthListing>,
}

impl Corpus {
    pub fn manifest(&self) -> Vec<PageRecord> {
        self.listings.iter().map(|l| l.record()).collect()
    }

    pub fn len(&self) -> usize {
        self.listings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.listings.is_empty()
    }
}

/// Independent per-page stream so page content depends only on
/// (seed, market, index), never on generation order.
fn page_rng(seed: u64, market: MarketId, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    let m = market.as_str().as_bytes();
    key[16..16 + m.len().min(16)].copy_from_slice(&m[..m.len().min(16)]);
    ChaCha8Rng::from_seed(key)
}

fn pick(rng: &mut ChaCha8Rng, pool: &'static [&'static str]) -> String {
    (*pool.choose(rng).unwrap()).to_string()
}

fn values_for(market: MarketId, rng: &mut ChaCha8Rng) -> ListingValues {
    let (whole, cents) = (rng.random_range(5..950u32), rng.random_range(0..100u32));
    let stock = rng.random_range(1..460u32).to_string();
    let views = rng.random_range(10..9900u32).to_string();

    let (product, model, vendor, description) = match market {
        MarketId::Palmetto => (
            pick(rng, vocab::FIREARM_PRODUCTS),
            pick(rng, vocab::FIREARM_CATEGORIES),
            pick(rng, vocab::FIREARM_VENDORS),
            pick(rng, vocab::FIREARM_DESCRIPTIONS),
        ),
        MarketId::Cocorico => (
            format!(
                "{} {}",
                pick(rng, vocab::PRODUCT_UNITS),
                pick(rng, vocab::PRODUCT_NAMES_FR)
            ),
            pick(rng, vocab::MODELS_FR),
            pick(rng, vocab::VENDORS),
            pick(rng, vocab::DESCRIPTIONS_FR),
        ),
        _ => (
            format!(
                "{} {}",
                pick(rng, vocab::PRODUCT_UNITS),
                pick(rng, vocab::PRODUCT_NAMES)
            ),
            pick(rng, vocab::MODELS),
            pick(rng, vocab::VENDORS),
            pick(rng, vocab::DESCRIPTIONS),
        ),
    };

    let (price, euro_amount) = match market {
        // Integer price display ("price 45"); the euro amount is derived.
        MarketId::Silkroad => (whole.to_string(), format!("{whole},{cents:02}")),
        // Comma-decimal price: the euro display is the price itself.
        MarketId::Cocorico => (format!("{whole},{cents:02}"), format!("{whole},{cents:02}")),
        _ => (format!("{whole}.{cents:02}"), format!("{whole},{cents:02}")),
    };

    let sku = format!(
        "psa-{}-{}{}{}",
        rng.random_range(1000..10000u32),
        (b'a' + rng.random_range(0..26u8)) as char,
        (b'a' + rng.random_range(0..26u8)) as char,
        (b'a' + rng.random_range(0..26u8)) as char,
    );

    ListingValues {
        product,
        model,
        vendor,
        description,
        price,
        euro_amount,
        stock,
        views,
        sku,
        brand: pick(rng, vocab::FIREARM_BRANDS),
    }
}

/// Entities eligible for a disruptive decoy (digit-anchored patterns).
const VICTIMS: [EntityType; 3] = [
    EntityType::QuantityInStock,
    EntityType::ProductPrice,
    EntityType::ProductViews,
];

/// Generate the corpus for `config`. Byte-deterministic: equal
/// (config, seed) produces equal pages and manifest.
pub fn generate_corpus(config: &GenConfig) -> Result<Corpus> {
    let mut listings = Vec::new();
    for (&market, &count) in &config.counts {
        for index in 0..count {
            let mut rng = page_rng(config.seed, market, index as u64);
            let values = values_for(market, &mut rng);
            let noisy = rng.random_bool(config.noise_rate.clamp(0.0, 1.0));
            let noise = NoisePlan {
                cosmetic: noisy,
                victim: if noisy {
                    Some(*VICTIMS.choose(&mut rng).unwrap())
                } else {
                    None
                },
            };
            let mut builder = PageBuilder::new(&mut rng, noise, template::filler_pool(market));
            template::render(market, &values, &mut builder);
            let page_id = format!("{market}-{index:04}");
            let url = format!("/pages/{page_id}.html");
            let listing = builder.finish(&page_id, &url, market);
            debug_assert!(listing.validate().is_ok());
            listings.push(listing);
        }
    }
    Ok(Corpus { listings })
}

/// Brute-force count of ground-truth entities per type.
pub fn entity_inventory(corpus: &Corpus) -> BTreeMap<EntityType, usize> {
    let mut counts = BTreeMap::new();
    for listing in &corpus.listings {
        for e in &listing.entities {
            *counts.entry(e.entity_type).or_insert(0) += 1;
        }
    }
    counts
}
