//! Automated edit metrics: global joint error, per-MEO fidelity tests and a
//! Frechet distance over clip-level geometric features.

mod features;
mod fidelity;
mod frechet;
mod gmpjpe;

pub use features::{geometric_features, FEATURE_NAMES};
pub use fidelity::{fidelity_auto, fidelity_test_for, FidelityItem, FidelityMeasure, FidelityTest, FIDELITY_THRESHOLD};
pub use frechet::{frechet_feature_distance, frechet_from_features, FrechetResult, RIDGE};
pub use gmpjpe::g_mpjpe;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("need at least 2 clips per set, got {0}")]
    TooFewClips(usize),
    #[error(transparent)]
    Edit(#[from] crate::keyframe::EditError),
}
