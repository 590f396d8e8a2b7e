//! On-disk corpus layout shared by the generator and the crawler, so the
//! extractor is agnostic to where pages came from:
//!
//! ```text
//! corpus/
//!   manifest.jsonl        one PageRecord per page
//!   ground_truth.jsonl    one GroundTruthEntity per entity (generator only)
//!   pages/<page_id>.html  raw page bytes
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::types::{GroundTruthEntity, GroundTruthListing, PageRecord};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";
pub const PAGES_DIR: &str = "pages";

/// Write one value per line as JSON.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CoreError::io(parent, e))?;
    }
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("serializable record");
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| CoreError::io(path, e))
}

/// Read line-delimited JSON, reporting the offending line on failure.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| CoreError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut items = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CoreError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| CoreError::Record {
            path: path.to_path_buf(),
            line: idx + 1,
            source,
        })?;
        items.push(item);
    }
    Ok(items)
}

pub fn page_path(dir: &Path, page_id: &str) -> PathBuf {
    dir.join(PAGES_DIR).join(format!("{page_id}.html"))
}

/// Persist listings in the corpus layout. Ground truth is written only when
/// at least one listing carries entities (crawled stores have none).
pub fn write_corpus(dir: &Path, listings: &[GroundTruthListing]) -> Result<()> {
    let pages = dir.join(PAGES_DIR);
    fs::create_dir_all(&pages).map_err(|e| CoreError::io(&pages, e))?;

    let mut manifest = Vec::with_capacity(listings.len());
    let mut truth = Vec::new();
    for listing in listings {
        let path = page_path(dir, &listing.page_id);
        let mut f = fs::File::create(&path).map_err(|e| CoreError::io(&path, e))?;
        f.write_all(listing.html.as_bytes())
            .map_err(|e| CoreError::io(&path, e))?;
        manifest.push(listing.record());
        truth.extend(listing.entities.iter().cloned());
    }
    write_jsonl(&dir.join(MANIFEST_FILE), &manifest)?;
    if !truth.is_empty() {
        write_jsonl(&dir.join(GROUND_TRUTH_FILE), &truth)?;
    }
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Vec<PageRecord>> {
    read_jsonl(&dir.join(MANIFEST_FILE))
}

pub fn read_ground_truth(path: &Path) -> Result<Vec<GroundTruthEntity>> {
    read_jsonl(path)
}

pub fn read_page_html(dir: &Path, page_id: &str) -> Result<String> {
    let path = page_path(dir, page_id);
    fs::read_to_string(&path).map_err(|e| CoreError::io(&path, e))
}

/// Ground truth grouped by page id, in file order within each page.
pub fn ground_truth_by_page(
    entities: &[GroundTruthEntity],
) -> BTreeMap<String, Vec<GroundTruthEntity>> {
    let mut map: BTreeMap<String, Vec<GroundTruthEntity>> = BTreeMap::new();
    for e in entities {
        map.entry(e.page_id.clone()).or_default().push(e.clone());
    }
    map
}
