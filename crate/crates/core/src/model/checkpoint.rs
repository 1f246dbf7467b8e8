//! Parameter checkpoint file.
//!
//! Self-describing container: magic `DAFCKPT1`, a u64 little-endian
//! header length, a JSON header (format version, model config,
//! modality set, seed, and an array table of name/shape/offset/len),
//! then the concatenated parameter values as little-endian f64s in
//! array-table order. Identical inputs serialize to identical bytes.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::ModalitySet;
use crate::error::{DafError, Result};
use crate::model::{ModelConfig, ParamSet};
use crate::tensor::Tensor;

const MAGIC: &[u8; 8] = b"DAFCKPT1";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ArrayMeta {
    name: String,
    shape: Vec<usize>,
    /// Offset into the payload, counted in f64 elements.
    offset: usize,
    len: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    model_config: ModelConfig,
    modalities: ModalitySet,
    seed: u64,
    arrays: Vec<ArrayMeta>,
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub modalities: ModalitySet,
    pub seed: u64,
    pub params: ParamSet,
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    ckpt.params.check_finite("save_checkpoint")?;
    let mut arrays = Vec::with_capacity(ckpt.params.len());
    let mut offset = 0;
    for (name, t) in ckpt.params.entries() {
        arrays.push(ArrayMeta {
            name: name.clone(),
            shape: t.shape().to_vec(),
            offset,
            len: t.len(),
        });
        offset += t.len();
    }
    let header = Header {
        format_version: CHECKPOINT_VERSION,
        model_config: ckpt.config.clone(),
        modalities: ckpt.modalities,
        seed: ckpt.seed,
        arrays,
    };
    let header_json = serde_json::to_vec(&header)?;

    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&(header_json.len() as u64).to_le_bytes())?;
    out.write_all(&header_json)?;
    for (_, t) in ckpt.params.entries() {
        for v in t.data() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let at = path.display().to_string();
    let mut file = fs::File::open(path)?;
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)
        .map_err(|_| DafError::Data(format!("{at}: truncated checkpoint")))?;
    if &magic != MAGIC {
        return Err(DafError::Data(format!("{at}: not a checkpoint file")));
    }
    let mut len_bytes = [0u8; 8];
    file.read_exact(&mut len_bytes)
        .map_err(|_| DafError::Data(format!("{at}: truncated header length")))?;
    let header_len = u64::from_le_bytes(len_bytes) as usize;
    let mut header_json = vec![0u8; header_len];
    file.read_exact(&mut header_json)
        .map_err(|_| DafError::Data(format!("{at}: truncated header")))?;
    let header: Header = serde_json::from_slice(&header_json)?;
    if header.format_version != CHECKPOINT_VERSION {
        return Err(DafError::Data(format!(
            "{at}: unsupported checkpoint version {}",
            header.format_version
        )));
    }

    let mut payload = Vec::new();
    file.read_to_end(&mut payload)?;
    let total: usize = header.arrays.iter().map(|a| a.len).sum();
    if payload.len() != total * 8 {
        return Err(DafError::Data(format!(
            "{at}: payload holds {} bytes, header expects {}",
            payload.len(),
            total * 8
        )));
    }

    let mut params = ParamSet::new();
    for meta in &header.arrays {
        let start = meta.offset * 8;
        let end = start + meta.len * 8;
        let data: Vec<f64> = payload[start..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        params.insert(meta.name.clone(), Tensor::new(meta.shape.clone(), data)?)?;
    }

    Ok(Checkpoint {
        config: header.model_config,
        modalities: header.modalities,
        seed: header.seed,
        params,
    })
}
