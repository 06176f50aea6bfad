//! Checkpoint file format.
//!
//! Layout: magic `MTF1` (4 bytes), u64 little-endian header length, UTF-8
//! JSON header (model config plus an ordered tensor index of name, shape,
//! and byte offset into the data section), then raw little-endian f32
//! data. Tensors appear in index order; offsets are relative to the start
//! of the data section.

use std::path::Path;

use serde::{Deserialize, Serialize};

use mtf_core::nn::{Arch, ModelConfig, ModelParams, Tensor, TensorMap};

use crate::{io_runtime, CliError};

const MAGIC: &[u8; 4] = b"MTF1";

#[derive(Debug, Serialize, Deserialize)]
struct ConfigJson {
    n_layers: usize,
    d_model: usize,
    d_ff: usize,
    n_heads: usize,
    vocab_src: usize,
    vocab_tgt: usize,
    max_len: usize,
    arch: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorIndexEntry {
    name: String,
    shape: Vec<usize>,
    offset: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    config: ConfigJson,
    tensors: Vec<TensorIndexEntry>,
}

pub fn write_checkpoint(path: &Path, params: &ModelParams<f32>) -> Result<(), CliError> {
    let mut index = Vec::new();
    let mut offset = 0u64;
    for (name, tensor) in params.tensors.iter() {
        index.push(TensorIndexEntry {
            name: name.to_string(),
            shape: tensor.shape().to_vec(),
            offset,
        });
        offset += (tensor.numel() * 4) as u64;
    }
    let header = Header {
        config: ConfigJson {
            n_layers: params.cfg.n_layers,
            d_model: params.cfg.d_model,
            d_ff: params.cfg.d_ff,
            n_heads: params.cfg.n_heads,
            vocab_src: params.cfg.vocab_src,
            vocab_tgt: params.cfg.vocab_tgt,
            max_len: params.cfg.max_len,
            arch: params.cfg.arch.as_str().to_string(),
        },
        tensors: index,
    };
    let header_json =
        serde_json::to_vec(&header).map_err(|e| CliError::runtime(format!("header: {e}")))?;

    let mut bytes = Vec::with_capacity(4 + 8 + header_json.len() + offset as usize);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&header_json);
    for (_name, tensor) in params.tensors.iter() {
        for v in tensor.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, bytes).map_err(|e| io_runtime("writing checkpoint", e))
}

pub fn read_checkpoint(path: &Path) -> Result<ModelParams<f32>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_runtime("reading checkpoint", e))?;
    let bad = |what: &str| CliError::validation(format!("{}: {what}", path.display()));
    if bytes.len() < 12 || &bytes[0..4] != MAGIC {
        return Err(bad("not a checkpoint file (bad magic)"));
    }
    let header_len = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    if bytes.len() < 12 + header_len {
        return Err(bad("truncated header"));
    }
    let header: Header = serde_json::from_slice(&bytes[12..12 + header_len])
        .map_err(|e| bad(&format!("bad header: {e}")))?;
    let arch = Arch::from_str(&header.config.arch)
        .ok_or_else(|| bad(&format!("unknown arch `{}`", header.config.arch)))?;
    let cfg = ModelConfig {
        n_layers: header.config.n_layers,
        d_model: header.config.d_model,
        d_ff: header.config.d_ff,
        n_heads: header.config.n_heads,
        vocab_src: header.config.vocab_src,
        vocab_tgt: header.config.vocab_tgt,
        max_len: header.config.max_len,
        arch,
    };
    let data = &bytes[12 + header_len..];
    let mut tensors = TensorMap::new();
    for entry in &header.tensors {
        let numel: usize = entry.shape.iter().product();
        let start = entry.offset as usize;
        let end = start + numel * 4;
        if end > data.len() {
            return Err(bad(&format!("tensor `{}` extends past the file", entry.name)));
        }
        let mut values = Vec::with_capacity(numel);
        for chunk in data[start..end].chunks_exact(4) {
            values.push(f32::from_le_bytes(chunk.try_into().unwrap()));
        }
        tensors.insert(&entry.name, Tensor::from_vec(&entry.shape, values));
    }
    Ok(ModelParams { cfg, tensors })
}
