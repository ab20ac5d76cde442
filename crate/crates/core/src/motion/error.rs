use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("invalid skeleton: {0}")]
    Skeleton(String),
    #[error("invalid pose: {0}")]
    Pose(String),
    #[error("invalid clip: {0}")]
    Clip(String),
    #[error("frame index {index} out of range 0..{len}")]
    FrameIndex { index: usize, len: usize },
    #[error("validation error at {field}: {message}")]
    Validation { field: String, message: String },
}
