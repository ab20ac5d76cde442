//! Frame resolution and joint-level keyframe edits.

mod axes;
mod edit;
mod execute;
mod ik;
mod resolve;

pub use axes::VerbAxisTable;
pub use edit::{apply_rotation, apply_translation, direction_vector, ik_chain, EditedKeyframe};
pub use execute::{execute_meo_keyframes, KeyframeEdits};
pub use ik::{solve_ik, ChainDof, IkConfig, IkOutcome};
pub use resolve::{extremum_values, resolve_frame, FrameSource, ResolvedFrame};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::Diagnostic;
use crate::motion::MotionError;

/// Magnitudes and solver settings used when an MEO leaves them open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EditConfig {
    pub default_rotation_deg: f64,
    pub default_translation_m: f64,
    pub default_relative_offset_m: f64,
    /// Frame shift applied by `before` / `after`.
    pub temporal_offset_frames: usize,
    pub ik: IkConfig,
}

impl Default for EditConfig {
    fn default() -> Self {
        Self {
            default_rotation_deg: 30.0,
            default_translation_m: 0.25,
            default_relative_offset_m: 0.10,
            temporal_offset_frames: 6,
            ik: IkConfig::default(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EditError {
    #[error("empty program")]
    EmptyProgram,
    #[error("program failed validation: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("extremum undefined: trajectory of `{joint}` is constant")]
    ExtremumUndefined { joint: String },
    #[error("`{verb}` is not applicable to `{joint}`")]
    Inapplicable { joint: String, verb: String },
    #[error("no joint `{0}` in skeleton")]
    UnknownJoint(String),
    #[error("no IK chain reaches `{0}`")]
    NoChain(String),
    #[error(transparent)]
    Motion(#[from] MotionError),
}
