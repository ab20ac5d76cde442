//! Infilling edited keyframes back into a source motion.
//!
//! Three engines share the keyframe stage from `meo-core`: a spline
//! baseline, a two-stage variant (root trajectory, then a diffusion denoiser
//! for the body) and a single-stage diffusion variant.

pub mod checkpoint;
pub mod denoiser;
pub mod engine;
pub mod features;
pub mod generative;
pub mod nn;
pub mod schedule;
pub mod spline;
pub mod trajectory;
pub mod training;
pub mod transformer;

pub use denoiser::{ContextMeanDenoiser, Denoiser, Normalizer, SmoothingOracleDenoiser, TrainingSample};
pub use engine::{Engine, EngineConfig, EngineOutput, EngineReport, EngineVariant, GuidanceMode};
pub use features::{clip_to_tensor, tensor_to_clip, FrameAttributeMask, MotionLayout};
pub use generative::{generative_infill, InfillCondition};
pub use schedule::{blend_lambda, noise_sample, DiffusionSchedule};
pub use spline::{spline_infill, ContextWindow};
pub use trajectory::{trajectory_infill, SplineTrajectoryInfiller, TrajectoryInfiller};
pub use training::{train, training_step, TrainConfig};
pub use transformer::{ToyTransformerDenoiser, TransformerConfig};

use meo_core::keyframe::EditError;
use meo_core::motion::MotionError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfillError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error(transparent)]
    Motion(#[from] MotionError),
}
