use std::sync::Arc;

use super::{MotionError, Quat, Skeleton, Vec3, UNIT_TOLERANCE};

/// One frame: root translation plus a local rotation per skeleton joint,
/// indexed in skeleton order. The root's entry is the root orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub root_translation: Vec3,
    rotations: Vec<Quat>,
}

impl Pose {
    pub fn new(root_translation: Vec3, rotations: Vec<Quat>) -> Result<Self, MotionError> {
        if !root_translation.iter().all(|v| v.is_finite()) {
            return Err(MotionError::Pose("root translation is not finite".into()));
        }
        for (i, q) in rotations.iter().enumerate() {
            let n = q.as_ref().norm();
            if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
                return Err(MotionError::Pose(format!("rotation {i} has norm {n}")));
            }
        }
        Ok(Self { root_translation, rotations })
    }

    /// Identity rotations with the root at `root_translation`.
    pub fn rest(skeleton: &Skeleton, root_translation: Vec3) -> Self {
        Self { root_translation, rotations: vec![Quat::identity(); skeleton.len()] }
    }

    pub fn rotations(&self) -> &[Quat] {
        &self.rotations
    }

    pub fn rotation(&self, joint: usize) -> Quat {
        self.rotations[joint]
    }

    pub fn set_rotation(&mut self, joint: usize, q: Quat) {
        self.rotations[joint] = q;
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    /// Exact equality on the IEEE-754 bit patterns of every component.
    pub fn bitwise_eq(&self, other: &Pose) -> bool {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        bits(self.root_translation.as_slice()) == bits(other.root_translation.as_slice())
            && self.rotations.len() == other.rotations.len()
            && self
                .rotations
                .iter()
                .zip(&other.rotations)
                .all(|(a, b)| bits(a.as_ref().coords.as_slice()) == bits(b.as_ref().coords.as_slice()))
    }
}

/// A fixed-length sequence of poses over one skeleton.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionClip {
    skeleton: Arc<Skeleton>,
    frames: Vec<Pose>,
    fps: u32,
}

impl MotionClip {
    pub const DEFAULT_FPS: u32 = 24;
    pub const DEFAULT_FRAMES: usize = 60;

    pub fn new(skeleton: Arc<Skeleton>, frames: Vec<Pose>, fps: u32) -> Result<Self, MotionError> {
        if fps == 0 {
            return Err(MotionError::Clip("fps must be positive".into()));
        }
        if frames.len() < 2 {
            return Err(MotionError::Clip(format!("need at least 2 frames, got {}", frames.len())));
        }
        if let Some(i) = frames.iter().position(|p| p.len() != skeleton.len()) {
            return Err(MotionError::Clip(format!(
                "frame {i} has {} rotations, skeleton has {} joints",
                frames[i].len(),
                skeleton.len()
            )));
        }
        Ok(Self { skeleton, frames, fps })
    }

    /// A clip holding the rest pose for `len` frames.
    pub fn rest(skeleton: Arc<Skeleton>, len: usize, fps: u32) -> Result<Self, MotionError> {
        let pose = Pose::rest(&skeleton, Vec3::new(0.0, Skeleton::HUMANOID_STANDING_HEIGHT, 0.0));
        Self::new(skeleton, vec![pose; len], fps)
    }

    pub fn skeleton(&self) -> &Arc<Skeleton> {
        &self.skeleton
    }

    pub fn frames(&self) -> &[Pose] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> Result<&Pose, MotionError> {
        self.frames.get(index).ok_or(MotionError::FrameIndex { index, len: self.frames.len() })
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn last_index(&self) -> usize {
        self.frames.len() - 1
    }

    /// Replaces one frame; the pose must match the skeleton.
    pub fn with_frame(&self, index: usize, pose: Pose) -> Result<Self, MotionError> {
        let mut frames = self.frames.clone();
        let len = frames.len();
        *frames.get_mut(index).ok_or(MotionError::FrameIndex { index, len })? = pose;
        Self::new(self.skeleton.clone(), frames, self.fps)
    }

    pub fn with_frames(&self, frames: Vec<Pose>) -> Result<Self, MotionError> {
        Self::new(self.skeleton.clone(), frames, self.fps)
    }

    pub fn into_frames(self) -> Vec<Pose> {
        self.frames
    }

    pub fn bitwise_eq(&self, other: &MotionClip) -> bool {
        self.fps == other.fps
            && self.skeleton == other.skeleton
            && self.frames.len() == other.frames.len()
            && self.frames.iter().zip(&other.frames).all(|(a, b)| a.bitwise_eq(b))
    }
}
