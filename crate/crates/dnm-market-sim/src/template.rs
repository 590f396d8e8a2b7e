//! Market page templates.
//!
//! Each template renders a listing page whose normalized text is recoverable
//! by that market's pattern registry: for every entity, the first match of
//! its pattern captures exactly the rendered surface. Keyword anchors are
//! therefore placed once, entity values come from pools that avoid anchor
//! words, and filler vocabulary is curated to never pre-empt a first match.
//!
//! Noise hooks: cosmetic noise (whitespace runs, stray symbols, decoy
//! numbers in filler) survives normalization without harming labels;
//! a `gap` decoy lands between a keyword anchor and its value and breaks
//! exactly that entity's label, which is what keeps labeling accuracy
//! realistically below 1.0 on noisy corpora.

use dnm_core::{EntityType, GroundTruthEntity, GroundTruthListing, MarketId};
use rand::prelude::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::vocab;

/// Entity values for one listing.
#[derive(Debug, Clone)]
pub struct ListingValues {
    pub product: String,
    pub model: String,
    pub vendor: String,
    pub description: String,
    /// Gold price surface in the market's own display form.
    pub price: String,
    /// Comma-decimal amount shown next to the view counter.
    pub euro_amount: String,
    pub stock: String,
    pub views: String,
    pub sku: String,
    pub brand: String,
}

/// Which noise applies to a page.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoisePlan {
    pub cosmetic: bool,
    /// Entity whose keyword gap receives a disruptive decoy number.
    pub victim: Option<EntityType>,
}

pub struct PageBuilder<'a> {
    html: String,
    entities: Vec<(EntityType, usize, usize, String)>,
    tokens: usize,
    at_block_start: bool,
    rng: &'a mut ChaCha8Rng,
    noise: NoisePlan,
    filler_pool: &'static [&'static str],
}

impl<'a> PageBuilder<'a> {
    pub fn new(
        rng: &'a mut ChaCha8Rng,
        noise: NoisePlan,
        filler_pool: &'static [&'static str],
    ) -> Self {
        PageBuilder {
            html: String::with_capacity(4096),
            entities: Vec::new(),
            tokens: 0,
            at_block_start: true,
            rng,
            noise,
            filler_pool,
        }
    }

    pub fn open(&mut self, tag: &str) {
        self.html.push('<');
        self.html.push_str(tag);
        self.html.push('>');
        self.at_block_start = true;
    }

    pub fn close(&mut self, tag: &str) {
        self.html.push_str("</");
        self.html.push_str(tag);
        self.html.push('>');
        self.at_block_start = true;
    }

    fn space(&mut self) {
        if !self.at_block_start {
            self.html.push(' ');
        }
        self.at_block_start = false;
    }

    /// Emit visible words (whole tokens only).
    pub fn word(&mut self, s: &str) {
        self.space();
        self.html.push_str(s);
        self.tokens += s.split_whitespace().count();
    }

    /// Emit an entity surface wrapped in a span, recording its byte range
    /// in the raw HTML.
    pub fn entity(&mut self, entity_type: EntityType, surface: &str) {
        self.space();
        self.html.push_str("<span>");
        let start = self.html.len();
        self.html.push_str(surface);
        let end = self.html.len();
        self.html.push_str("</span>");
        self.entities
            .push((entity_type, start, end, surface.to_string()));
        self.tokens += surface.split_whitespace().count();
    }

    /// Disruptive decoy between a keyword and its value when `entity_type`
    /// is this page's noise victim.
    pub fn gap(&mut self, entity_type: EntityType) {
        if self.noise.victim == Some(entity_type) {
            let decoy = self.rng.random_range(100..1000u32);
            self.word(&decoy.to_string());
        }
    }

    /// Emit `n` filler words, with occasional cosmetic noise on noisy pages.
    pub fn filler(&mut self, n: usize) {
        for _ in 0..n {
            if self.noise.cosmetic && self.rng.random_bool(0.06) {
                match self.rng.random_range(0..3u8) {
                    0 => self.html.push_str("  \n\t "),
                    1 => {
                        let sym = ["&", "*", ";", ":", "&&"].choose(self.rng).unwrap();
                        self.space();
                        self.html.push_str(sym);
                    }
                    _ => {
                        let decoy = self.rng.random_range(10..10000u32);
                        self.word(&decoy.to_string());
                    }
                }
            }
            let w = *self.filler_pool.choose(self.rng).unwrap();
            self.word(w);
        }
    }

    /// Trailing filler sized to land the page near its token budget.
    pub fn fill_to_budget(&mut self, budget: usize) {
        let remaining = budget.saturating_sub(self.tokens).max(4);
        let jitter = (remaining / 10).max(1);
        let n = remaining - jitter + self.rng.random_range(0..=2 * jitter);
        // paragraphs of ~14 words
        let mut left = n;
        while left > 0 {
            let chunk = left.min(14);
            self.open("div");
            self.filler(chunk);
            self.close("div");
            left -= chunk;
        }
    }

    pub fn token_count(&self) -> usize {
        self.tokens
    }

    pub fn finish(
        self,
        page_id: &str,
        url: &str,
        market_id: MarketId,
    ) -> GroundTruthListing {
        let entities = self
            .entities
            .into_iter()
            .map(|(entity_type, char_start, char_end, surface)| GroundTruthEntity {
                page_id: page_id.to_string(),
                entity_type,
                char_start,
                char_end,
                surface,
            })
            .collect();
        GroundTruthListing {
            page_id: page_id.to_string(),
            url: url.to_string(),
            market_id,
            language: market_id.language(),
            html: self.html,
            entities,
        }
    }
}

/// Per-market mean token targets for generated pages.
pub fn token_budget(market: MarketId) -> usize {
    match market {
        MarketId::AgarthaItem => 230,
        MarketId::AgarthaPurchase => 230,
        MarketId::Berlusconi => 184,
        MarketId::Cannahome => 1385,
        MarketId::Cocorico => 153,
        MarketId::Darkmarket => 175,
        MarketId::Silkroad => 267,
        MarketId::Palmetto => 1246,
    }
}

pub fn filler_pool(market: MarketId) -> &'static [&'static str] {
    match market {
        MarketId::Cocorico => vocab::FILLER_FR,
        MarketId::Palmetto => vocab::FILLER_PALMETTO,
        _ => vocab::FILLER_EN,
    }
}

use EntityType::*;

pub fn render(market: MarketId, v: &ListingValues, b: &mut PageBuilder<'_>) {
    b.open("html");
    b.open("body");
    match market {
        MarketId::AgarthaItem => agartha_item(v, b),
        MarketId::AgarthaPurchase => agartha_purchase(v, b),
        MarketId::Berlusconi => berlusconi(v, b),
        MarketId::Cannahome => cannahome(v, b),
        MarketId::Cocorico => cocorico(v, b),
        MarketId::Darkmarket => darkmarket(v, b),
        MarketId::Silkroad => silkroad(v, b),
        MarketId::Palmetto => palmetto(v, b),
    }
    b.fill_to_budget(token_budget(market));
    b.close("body");
    b.close("html");
}

fn agartha_item(v: &ListingValues, b: &mut PageBuilder<'_>) {
    b.open("div");
    b.entity(MarketName, "agartha");
    b.word("purchase");
    b.word("home");
    b.filler(6);
    b.close("div");

    b.open("div");
    b.word("listings");
    b.entity(ProductDescription, &v.description);
    b.word("purchase");
    b.word("help");
    b.word("faq");
    b.filler(5);
    b.close("div");

    b.open("div");
    b.word("1listings");
    b.entity(Product, &v.product);
    b.word("message");
    b.close("div");

    b.open("div");
    b.word("vendor");
    b.entity(VendorName, &v.vendor);
    b.word("category");
    b.entity(Model, &v.model);
    b.word("availability");
    b.gap(QuantityInStock);
    b.entity(QuantityInStock, &v.stock);
    b.word("price");
    b.gap(ProductPrice);
    b.entity(ProductPrice, &v.price);
    b.word("usd");
    b.close("div");

    b.open("div");
    b.entity(ProductViews, &v.views);
    b.gap(ProductViews);
    b.word(&v.euro_amount);
    b.word("€");
    b.close("div");
}

fn agartha_purchase(v: &ListingValues, b: &mut PageBuilder<'_>) {
    b.open("div");
    b.entity(MarketName, "agartha");
    b.word("purchase");
    b.word("account");
    b.filler(6);
    b.close("div");

    b.open("div");
    b.word("listings");
    b.entity(ProductDescription, &v.description);
    b.word("purchase");
    b.word("info");
    b.filler(5);
    b.close("div");

    b.open("div");
    b.word("1purchase");
    b.entity(Product, &v.product);
    b.word("category");
    b.entity(Model, &v.model);
    b.word("availability");
    b.gap(QuantityInStock);
    b.entity(QuantityInStock, &v.stock);
    b.close("div");

    b.open("div");
    b.entity(ProductPrice, &v.price);
    b.gap(ProductPrice);
    b.word("usd");
    b.word("vendor");
    b.entity(VendorName, &v.vendor);
    b.close("div");

    b.open("div");
    b.entity(ProductViews, &v.views);
    b.gap(ProductViews);
    b.word(&v.euro_amount);
    b.word("€");
    b.close("div");
}

fn berlusconi(v: &ListingValues, b: &mut PageBuilder<'_>) {
    // The product title is the very first text node: the product pattern is
    // anchored at the start of the page text.
    b.open("div");
    b.entity(Product, &v.product);
    b.entity(ProductPrice, &v.price);
    b.gap(ProductPrice);
    b.word("eur");
    b.close("div");

    b.open("div");
    b.entity(MarketName, "berlusconi");
    b.word("vendita");
    b.filler(5);
    b.close("div");

    b.open("div");
    b.word("vendor");
    b.entity(VendorName, &v.vendor);
    b.word("class");
    b.entity(Model, &v.model);
    b.entity(QuantityInStock, &v.stock);
    b.gap(QuantityInStock);
    b.word("in");
    b.word("stock");
    b.close("div");

    b.open("div");
    b.word("avis");
    b.entity(ProductDescription, &v.description);
    b.word("modèle");
    b.filler(4);
    b.close("div");

    b.open("div");
    b.entity(ProductViews, &v.views);
    b.gap(ProductViews);
    b.word(&v.euro_amount);
    b.word("€");
    b.close("div");
}

fn cannahome(v: &ListingValues, b: &mut PageBuilder<'_>) {
    b.open("div");
    b.entity(MarketName, "cannahome");
    b.word("purchase");
    b.word("menu");
    b.filler(8);
    b.close("div");

    b.open("div");
    b.word("details");
    b.entity(Product, &v.product);
    b.word("availability");
    b.gap(QuantityInStock);
    b.entity(QuantityInStock, &v.stock);
    b.word("category");
    b.entity(Model, &v.model);
    b.close("div");

    b.open("div");
    b.word("escrow");
    b.gap(ProductPrice);
    b.entity(ProductPrice, &v.price);
    b.word("vendor");
    b.entity(VendorName, &v.vendor);
    b.close("div");

    b.open("div");
    b.word("avis");
    b.entity(ProductDescription, &v.description);
    b.word("modèle");
    b.filler(10);
    b.close("div");

    b.open("div");
    b.entity(ProductViews, &v.views);
    b.gap(ProductViews);
    b.word("orders");
    b.close("div");
}

fn cocorico(v: &ListingValues, b: &mut PageBuilder<'_>) {
    b.open("div");
    b.entity(MarketName, "cocorico market");
    b.word("accueil");
    b.filler(4);
    b.close("div");

    b.open("div");
    b.word("recherche");
    b.entity(Product, &v.product);
    b.word("description");
    b.filler(3);
    b.close("div");

    b.open("div");
    b.word("avis");
    b.entity(ProductDescription, &v.description);
    b.word("modèle");
    b.entity(Model, &v.model);
    // French typography: "disponibilité : 42"; normalization removes the colon.
    b.word("disponibilité");
    b.word(":");
    b.gap(QuantityInStock);
    b.entity(QuantityInStock, &v.stock);
    b.close("div");

    b.open("div");
    b.word("vendu");
    b.word("par");
    b.entity(VendorName, &v.vendor);
    b.word("rating");
    b.close("div");

    // One euro display serves both the view counter and the comma-form price.
    b.open("div");
    b.word("vu");
    b.entity(ProductViews, &v.views);
    b.gap(ProductViews);
    b.entity(ProductPrice, &v.price);
    b.gap(ProductPrice);
    b.word("€");
    b.close("div");
}

fn darkmarket(v: &ListingValues, b: &mut PageBuilder<'_>) {
    b.open("div");
    b.entity(MarketName, "darkmarket");
    b.word("purchase");
    b.word("home");
    b.close("div");

    // No digits may precede this block: the product pattern anchors on the
    // first "1 " in the page text.
    b.open("div");
    b.word("1");
    b.entity(Product, &v.product);
    b.word("quality");
    b.word("shop");
    b.filler(6);
    b.close("div");

    b.open("div");
    b.word("listings");
    b.entity(ProductDescription, &v.description);
    b.word("quality");
    b.filler(4);
    b.close("div");

    b.open("div");
    b.word("type");
    b.entity(Model, &v.model);
    b.word("leftsold");
    b.gap(QuantityInStock);
    b.entity(QuantityInStock, &v.stock);
    b.word("offers");
    b.gap(ProductPrice);
    b.entity(ProductPrice, &v.price);
    b.close("div");

    b.open("div");
    b.word("information");
    b.entity(VendorName, &v.vendor);
    b.close("div");

    b.open("div");
    b.entity(ProductViews, &v.views);
    b.gap(ProductViews);
    b.word(&v.euro_amount);
    b.word("€");
    b.close("div");
}

fn silkroad(v: &ListingValues, b: &mut PageBuilder<'_>) {
    b.open("div");
    b.entity(MarketName, "silk road");
    b.word("anonymous");
    b.word("marketplace");
    b.filler(6);
    b.close("div");

    b.open("div");
    b.word("usd");
    b.entity(Product, &v.product);
    b.word("price");
    b.gap(ProductPrice);
    b.entity(ProductPrice, &v.price);
    b.close("div");

    b.open("div");
    b.word("category");
    b.entity(Model, &v.model);
    b.word("stock");
    b.word("remaining");
    b.gap(QuantityInStock);
    b.entity(QuantityInStock, &v.stock);
    b.close("div");

    b.open("div");
    b.word("listings");
    b.entity(VendorName, &v.vendor);
    b.filler(4);
    b.close("div");

    b.open("div");
    b.word("avis");
    b.entity(ProductDescription, &v.description);
    b.word("modèle");
    b.close("div");

    b.open("div");
    b.entity(ProductViews, &v.views);
    b.gap(ProductViews);
    b.word(&v.euro_amount);
    b.word("€");
    b.close("div");
}

fn palmetto(v: &ListingValues, b: &mut PageBuilder<'_>) {
    b.open("div");
    b.entity(MarketName, "palmetto armory");
    b.word("firearms");
    b.word("superstore");
    b.filler(8);
    b.close("div");

    b.open("div");
    b.word("item");
    b.entity(Product, &v.product);
    b.word("specifications");
    b.close("div");

    b.open("div");
    b.word("category");
    b.entity(Model, &v.model);
    b.word("brand");
    b.entity(Brand, &v.brand);
    b.word("sku");
    b.entity(Sku, &v.sku);
    b.close("div");

    b.open("div");
    b.word("price");
    b.gap(ProductPrice);
    b.entity(ProductPrice, &v.price);
    b.word("inventory");
    b.gap(QuantityInStock);
    b.entity(QuantityInStock, &v.stock);
    b.word("seller");
    b.entity(VendorName, &v.vendor);
    b.close("div");

    b.open("div");
    b.word("viewed");
    b.gap(ProductViews);
    b.entity(ProductViews, &v.views);
    b.word("times");
    b.close("div");

    b.open("div");
    b.word("overview");
    b.entity(ProductDescription, &v.description);
    b.word("shipping");
    b.word("policies");
    b.filler(10);
    b.close("div");
}
