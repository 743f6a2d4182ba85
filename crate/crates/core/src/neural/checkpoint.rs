use serde::{Deserialize, Serialize};

use super::scorer::{CacheScorerParams, ScorerDims};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SMTSCORE";
pub const CHECKPOINT_FORMAT: &str = "sectionmt.scorer";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointHeader {
    format: String,
    version: u32,
    config_hash: String,
    seed: u64,
    vocab_size: usize,
    dims: ScorerDims,
    freeze_embeddings: bool,
    /// Layer sizes of the score and gate networks, input first.
    score_shape: Vec<usize>,
    gate_shape: Vec<usize>,
}

/// Layout: magic, u32 version, u32 header length, JSON header, then every
/// parameter as little-endian f64 in [`CacheScorerParams::flatten`] order.
pub fn save_checkpoint(params: &CacheScorerParams, config_hash: &str) -> Result<Vec<u8>> {
    let header = CheckpointHeader {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        config_hash: config_hash.into(),
        seed: params.seed,
        vocab_size: params.vocab_size,
        dims: params.dims,
        freeze_embeddings: params.freeze_embeddings,
        score_shape: params.score_net.dims(),
        gate_shape: params.gate_net.dims(),
    };
    let json = serde_json::to_vec(&header)?;
    let values = params.flatten();
    let mut out = Vec::with_capacity(16 + json.len() + 8 * values.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Returns the parameters and the recorded config hash.
pub fn load_checkpoint(bytes: &[u8]) -> Result<(CacheScorerParams, String)> {
    let bad = |m: &str| Error::input(format!("scorer checkpoint: {m}"));
    if bytes.len() < 16 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let hlen = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = bytes.get(16..16 + hlen).ok_or_else(|| bad("truncated header"))?;
    let header: CheckpointHeader = serde_json::from_slice(body)?;
    if header.format != CHECKPOINT_FORMAT || header.version != version {
        return Err(bad("header mismatch"));
    }
    let mut params = CacheScorerParams::zeros(header.dims, header.vocab_size);
    if params.score_net.dims() != header.score_shape || params.gate_net.dims() != header.gate_shape {
        return Err(bad("layer shapes do not match dims"));
    }
    params.seed = header.seed;
    params.freeze_embeddings = header.freeze_embeddings;
    let data = &bytes[16 + hlen..];
    if data.len() != 8 * params.param_count() {
        return Err(bad(&format!(
            "expected {} parameter bytes, found {}",
            8 * params.param_count(),
            data.len()
        )));
    }
    let values: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    params.load_flat(&values)?;
    Ok((params, header.config_hash))
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_roundtrip() {
        let dims = ScorerDims { d: 3, score_hidden: [5, 4], gate_hidden: [4, 2] };
        let mut p = CacheScorerParams::init(dims, 7, 42).unwrap();
        p.freeze_embeddings = true;
        let bytes = save_checkpoint(&p, "abc").unwrap();
        let (q, hash) = load_checkpoint(&bytes).unwrap();
        assert_eq!(hash, "abc");
        assert_eq!(p, q);
        assert_eq!(save_checkpoint(&q, "abc").unwrap(), bytes);
        assert!(load_checkpoint(&bytes[..bytes.len() - 1]).is_err());
    }
}
