//! Binary container for a trained [`ToyTransformerDenoiser`].
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! 0      8 bytes   magic "MEODNSR\0"
//! 8      u32       format version (1)
//! 12     u32       header length H in bytes
//! 16     H bytes   UTF-8 JSON header (CheckpointHeader)
//! 16+H   ...       parameter blobs, f32 LE, row-major, in header order
//! ```
//!
//! Each header tensor entry records its name, shape and byte offset relative
//! to the start of the blob section. Trailing bytes are rejected.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::denoiser::Normalizer;
use crate::features::MotionLayout;
use crate::schedule::DiffusionSchedule;
use crate::transformer::{ToyTransformerDenoiser, TransformerConfig};
use crate::InfillError;
use meo_core::Skeleton;

pub const MAGIC: &[u8; 8] = b"MEODNSR\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: [usize; 2],
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDescriptor {
    pub features: usize,
    pub joints: Vec<String>,
}

impl LayoutDescriptor {
    pub fn of(skeleton: &Skeleton) -> Self {
        Self {
            features: MotionLayout::of(skeleton).features(),
            joints: skeleton.joints().iter().map(|j| j.name.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub model: String,
    pub config: TransformerConfig,
    pub layout: LayoutDescriptor,
    pub normalizer: Normalizer,
    pub alpha_bar: Vec<f64>,
    pub tensors: Vec<TensorEntry>,
    /// Free-form training metadata (steps, losses, seeds).
    #[serde(default)]
    pub training: serde_json::Value,
}

pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub denoiser: ToyTransformerDenoiser,
    pub schedule: DiffusionSchedule,
}

fn bad(msg: impl Into<String>) -> InfillError {
    InfillError::Checkpoint(msg.into())
}

pub fn encode_checkpoint(
    model: &ToyTransformerDenoiser,
    schedule: &DiffusionSchedule,
    skeleton: &Skeleton,
    training: serde_json::Value,
) -> Vec<u8> {
    let mut tensors = Vec::new();
    let mut blobs = Vec::new();
    for (name, v) in model.params.names.iter().zip(&model.params.values) {
        tensors.push(TensorEntry { name: name.clone(), shape: [v.nrows(), v.ncols()], offset: blobs.len() });
        for x in v.iter() {
            blobs.extend_from_slice(&x.to_le_bytes());
        }
    }
    let header = CheckpointHeader {
        model: "toy-transformer".into(),
        config: model.config.clone(),
        layout: LayoutDescriptor::of(skeleton),
        normalizer: model.normalizer.clone(),
        alpha_bar: schedule.alphas().to_vec(),
        tensors,
        training,
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + json.len() + blobs.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&blobs);
    out
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32, InfillError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .ok_or_else(|| bad("truncated preamble"))
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint, InfillError> {
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad("not a denoiser checkpoint (bad magic)"));
    }
    let version = read_u32(bytes, 8)?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let hlen = read_u32(bytes, 12)? as usize;
    let hbytes = bytes.get(16..16 + hlen).ok_or_else(|| bad("truncated header"))?;
    let header: CheckpointHeader =
        serde_json::from_slice(hbytes).map_err(|e| bad(format!("header: {e}")))?;
    if header.model != "toy-transformer" {
        return Err(bad(format!("unknown model `{}`", header.model)));
    }
    if header.layout != LayoutDescriptor::of(&Skeleton::humanoid()) {
        return Err(bad("layout descriptor does not match this build's motion layout"));
    }
    let blobs = &bytes[16 + hlen..];
    let mut values = Vec::with_capacity(header.tensors.len());
    let mut end = 0;
    for t in &header.tensors {
        let n = t.shape[0] * t.shape[1];
        if t.offset != end {
            return Err(bad(format!("tensor `{}` at offset {}, expected {end}", t.name, t.offset)));
        }
        let raw = blobs.get(t.offset..t.offset + 4 * n).ok_or_else(|| bad(format!("tensor `{}` truncated", t.name)))?;
        let data: Vec<f32> = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        values.push(Array2::from_shape_vec((t.shape[0], t.shape[1]), data).expect("length checked"));
        end += 4 * n;
    }
    if end != blobs.len() {
        return Err(bad(format!("{} trailing bytes", blobs.len() - end)));
    }
    let schedule = DiffusionSchedule::new(header.alpha_bar.clone())?;
    let denoiser = ToyTransformerDenoiser::with_params(header.config.clone(), header.normalizer.clone(), values)
        .map_err(bad)?;
    let names_match = denoiser.params.names.iter().eq(header.tensors.iter().map(|t| &t.name));
    if !names_match {
        return Err(bad("tensor names do not match the model"));
    }
    Ok(Checkpoint { header, denoiser, schedule })
}

pub fn save_checkpoint(
    path: &Path,
    model: &ToyTransformerDenoiser,
    schedule: &DiffusionSchedule,
    training: serde_json::Value,
) -> Result<(), InfillError> {
    let bytes = encode_checkpoint(model, schedule, &Skeleton::humanoid(), training);
    std::fs::write(path, bytes).map_err(|e| bad(format!("{}: {e}", path.display())))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, InfillError> {
    let bytes = std::fs::read(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    decode_checkpoint(&bytes)
}
