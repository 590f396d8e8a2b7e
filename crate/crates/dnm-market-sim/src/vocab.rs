//! Word pools for page synthesis. Every pool is curated against the pattern
//! registry's anchor keywords so filler text can never pre-empt a first
//! match; entity values are lowercase, single-spaced, and free of the
//! symbols normalization strips, so surfaces survive the pipeline intact.

pub const PRODUCT_NAMES: &[&str] = &[
    "og kush",
    "blue dream",
    "amnesia haze",
    "white widow",
    "northern lights",
    "gorilla glue",
    "purple punch",
    "lemon haze",
    "critical mass",
    "sour diesel",
    "mdma pills",
    "lsd blotters",
    "xanax bars",
    "dmt crystal",
    "ketamine shards",
    "hash morocco",
    "charas cream",
    "shatter slabs",
    "wax crumble",
    "cbd oil",
];

pub const PRODUCT_UNITS: &[&str] = &["5g", "10g", "28g", "50g", "100g", "100x", "50x", "25x"];

pub const PRODUCT_NAMES_FR: &[&str] = &[
    "résine marocaine",
    "herbe premium",
    "champignons magiques",
    "pollen blond",
    "huile de cbd",
    "fleurs séchées",
    "cristaux purs",
];

pub const VENDORS: &[&str] = &[
    "acidqueen",
    "dutchmaster",
    "nightowl",
    "greenwolf",
    "silentpharma",
    "kingpin",
    "zenbotanics",
    "frostlab",
    "darkherb",
    "chembrother",
    "alice",
    "rawsmith",
    "pharmaboss",
    "mellowman",
    "purehands",
    "greenmile",
    "smokelord",
    "happychem",
];

pub const MODELS: &[&str] = &[
    "cannabis",
    "stimulants",
    "opioids",
    "psychedelics",
    "benzos",
    "dissociatives",
    "steroids",
    "concentrates",
    "edibles",
    "prescriptions",
];

pub const MODELS_FR: &[&str] = &["cannabis", "résine", "herbe", "extraits", "champignons"];

pub const DESCRIPTIONS: &[&str] = &[
    "top shelf indoor grown flower",
    "lab tested purity guaranteed",
    "fast discreet worldwide delivery",
    "vacuum sealed stealth packaging",
    "premium batch direct from source",
    "trusted supplier with repeat buyers",
    "finest selection hand picked",
    "smooth clean uplifting effect",
];

pub const DESCRIPTIONS_FR: &[&str] = &[
    "qualité supérieure garantie",
    "expédition rapide et discrète",
    "produit testé en laboratoire",
    "emballage sous vide renforcé",
];

/// English filler, safe on every market.
pub const FILLER_EN: &[&str] = &[
    "discreet",
    "packaging",
    "worldwide",
    "delivery",
    "tracked",
    "secure",
    "trusted",
    "premium",
    "lab",
    "tested",
    "pure",
    "fresh",
    "batch",
    "direct",
    "fast",
    "friendly",
    "support",
    "refund",
    "policy",
    "reship",
    "guarantee",
    "customs",
    "safe",
    "vacuum",
    "sealed",
    "stealth",
    "express",
    "standard",
    "business",
    "days",
    "hours",
    "checkout",
    "wallet",
    "payment",
    "encrypted",
    "pgp",
    "contact",
    "reviews",
    "feedback",
    "positive",
    "satisfied",
    "customers",
    "repeat",
    "buyers",
    "bulk",
    "sample",
    "grade",
    "strain",
    "harvest",
    "indoor",
    "outdoor",
    "organic",
    "aroma",
    "flavor",
    "potency",
    "effect",
    "relaxing",
    "uplifting",
    "smooth",
    "clean",
    "finest",
    "selection",
];

/// French filler, used only on Cocorico. Doubles as the marker vocabulary
/// for the language-partition check.
pub const FILLER_FR: &[&str] = &[
    "bienvenue",
    "boutique",
    "française",
    "produits",
    "livraison",
    "rapide",
    "discrète",
    "qualité",
    "supérieure",
    "vendeur",
    "vérifié",
    "paiement",
    "sécurisé",
    "expédition",
    "suivie",
    "emballage",
    "renforcé",
    "merci",
    "commande",
    "service",
    "client",
    "réactif",
    "garantie",
    "remboursement",
    "frais",
    "récolte",
    "intérieur",
    "biologique",
    "arôme",
    "saveur",
    "puissance",
    "effet",
    "relaxant",
    "doux",
    "propre",
    "meilleure",
    "sélection",
    "fidèle",
    "clients",
];

pub const FIREARM_PRODUCTS: &[&str] = &[
    "ar-15 complete lower receiver",
    "9mm luger fmj rounds",
    "tactical red dot optic",
    "bolt carrier group nitride",
    "adjustable carbine buffer tube",
    "threaded stainless barrel",
    "compact striker fired pistol",
    "free float handguard mlok",
];

pub const FIREARM_BRANDS: &[&str] = &[
    "psa", "glock", "ruger", "colt", "smith", "magpul", "sig", "aero", "bcm", "geissele",
];

/// 19 product categories, mirroring the robustness market's breadth.
pub const FIREARM_CATEGORIES: &[&str] = &[
    "rifles",
    "pistols",
    "shotguns",
    "ammunition",
    "optics",
    "magazines",
    "lowers",
    "uppers",
    "barrels",
    "triggers",
    "stocks",
    "grips",
    "sights",
    "holsters",
    "cleaning",
    "mounts",
    "lasers",
    "slides",
    "frames",
];

pub const FIREARM_VENDORS: &[&str] = &[
    "armsdepot",
    "freedomworks",
    "eagleoutfitters",
    "ironsights",
    "libertyarms",
    "rangemaster",
    "steelworks",
    "patriotsupply",
    "blackflag",
    "redstone",
    "coppercreek",
    "frontiersman",
    "gunvault",
    "homestead",
    "marksman",
    "northridge",
    "oldglory",
    "pinnacle",
    "quartermaster",
    "ridgeline",
    "sharpshooter",
    "tacticalpro",
    "warhorse",
    "yellowstone",
];

pub const FIREARM_DESCRIPTIONS: &[&str] = &[
    "precision machined billet aluminum upper",
    "mil spec anodized finish throughout",
    "drop in trigger with crisp break",
    "lightweight profile for duty use",
];

/// Filler for the robustness market.
pub const FILLER_PALMETTO: &[&str] = &[
    "federal",
    "firearms",
    "license",
    "transfer",
    "required",
    "compliance",
    "applicable",
    "regulations",
    "buyer",
    "responsible",
    "local",
    "laws",
    "background",
    "check",
    "dealer",
    "ffl",
    "holder",
    "signature",
    "adult",
    "upon",
    "receipt",
    "warranty",
    "manufacturer",
    "defects",
    "lifetime",
    "coverage",
    "accessories",
    "included",
    "manual",
    "hardcase",
    "threaded",
    "rail",
    "picatinny",
    "grip",
    "ergonomic",
    "lightweight",
    "durable",
    "anodized",
    "finish",
    "precision",
    "machined",
    "aluminum",
    "billet",
    "forged",
    "tactical",
    "operators",
    "enthusiasts",
    "collectors",
    "range",
    "proven",
];
