//! Flat binary checkpoints: a JSON header (format version, hyperparameters,
//! tensor directory) followed by little-endian f64 tensor data in directory
//! order. Byte-identical for identical parameter stores and headers.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::params::ParamStore;
use crate::{NeuralError, Result};

const MAGIC: &[u8; 8] = b"DNMW0001";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: u32,
    hyperparams: serde_json::Value,
    tensors: Vec<TensorInfo>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorInfo {
    name: String,
    rows: usize,
    cols: usize,
}

pub fn save(store: &ParamStore, hyperparams: &serde_json::Value, path: &Path) -> Result<()> {
    let header = Header {
        format: 1,
        hyperparams: hyperparams.clone(),
        tensors: store
            .iter()
            .map(|(_, p)| TensorInfo {
                name: p.name.clone(),
                rows: p.value.nrows(),
                cols: p.value.ncols(),
            })
            .collect(),
    };
    let header_bytes = serde_json::to_vec(&header).expect("serializable header");

    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(MAGIC)?;
    f.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    f.write_all(&header_bytes)?;
    for (_, p) in store.iter() {
        for &x in p.value.iter() {
            f.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn load(path: &Path) -> Result<(ParamStore, serde_json::Value)> {
    let bad = |detail: &str| NeuralError::Checkpoint {
        path: path.display().to_string(),
        detail: detail.to_string(),
    };
    let mut f = fs::File::open(path)?;
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let mut len_bytes = [0u8; 4];
    f.read_exact(&mut len_bytes)?;
    let mut header_bytes = vec![0u8; u32::from_le_bytes(len_bytes) as usize];
    f.read_exact(&mut header_bytes)?;
    let header: Header =
        serde_json::from_slice(&header_bytes).map_err(|e| bad(&format!("header: {e}")))?;
    if header.format != 1 {
        return Err(bad("unsupported format"));
    }

    let mut store = ParamStore::new();
    for info in &header.tensors {
        let mut data = vec![0u8; info.rows * info.cols * 8];
        f.read_exact(&mut data)
            .map_err(|_| bad(&format!("truncated tensor {}", info.name)))?;
        let values: Vec<f64> = data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let array = Array2::from_shape_vec((info.rows, info.cols), values)
            .map_err(|_| bad(&format!("bad shape for {}", info.name)))?;
        store.add(info.name.clone(), array);
    }
    Ok((store, header.hyperparams))
}
