//! Skeletons, poses, clips, forward kinematics and clip file formats.
//!
//! Conventions: world-up is +y, the character faces +z at rest, so the
//! character's right side is -x. Distances are meters.

mod bvh;
mod clip;
mod error;
mod fk;
mod io;
mod skeleton;
mod trajectory;

pub use bvh::{euler_zxy_from_quat, export_bvh, quat_from_euler_zxy};
pub use clip::{MotionClip, Pose};
pub use error::MotionError;
pub use fk::{forward_kinematics, WorldPose};
pub use io::{load_clip, save_clip};
pub use skeleton::{JointSpec, Skeleton, ROOT_JOINT};
pub use trajectory::{
    compose_root_trajectory, extract_root_trajectory, yaw_angle, yaw_from_angle, yaw_of, BodyMotion, RootTrajectory,
};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Quat = nalgebra::UnitQuaternion<f64>;

/// World up axis.
pub fn up() -> Vec3 {
    Vec3::y()
}

/// Quaternion norm tolerance accepted by [`Pose`] constructors.
pub const UNIT_TOLERANCE: f64 = 1e-6;
pub use io::{clip_from_json, clip_to_json};
