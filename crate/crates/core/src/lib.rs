//! Motion substrate, the MEO editing language, and the keyframe editing engine.
//!
//! A [`motion::MotionClip`] is edited by an [`lang::MeoProgram`]: every MEO
//! names one joint constraint and one frame reference. The [`keyframe`]
//! module resolves frame references against the clip and applies the
//! constraints with forward/inverse kinematics; [`eval`] scores the result.

pub mod eval;
pub mod keyframe;
pub mod lang;
pub mod motion;
pub mod synth;

pub use lang::{Joint, Meo, MeoProgram};
pub use motion::{MotionClip, Pose, Quat, Skeleton, Vec3};
