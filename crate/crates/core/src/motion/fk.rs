use std::collections::BTreeMap;

use super::{MotionClip, MotionError, Pose, Quat, Skeleton, Vec3};

/// World-space transforms of every joint for one pose, in skeleton order.
#[derive(Debug, Clone)]
pub struct WorldPose {
    pub positions: Vec<Vec3>,
    pub rotations: Vec<Quat>,
}

impl WorldPose {
    pub fn compute(skeleton: &Skeleton, pose: &Pose) -> Self {
        let n = skeleton.len();
        let mut positions = Vec::with_capacity(n);
        let mut rotations = Vec::with_capacity(n);
        for i in 0..n {
            match skeleton.parent(i) {
                None => {
                    positions.push(pose.root_translation);
                    rotations.push(pose.rotation(i));
                }
                Some(p) => {
                    let parent_rot = rotations[p];
                    positions.push(positions[p] + parent_rot * skeleton.joint(i).offset);
                    rotations.push(parent_rot * pose.rotation(i));
                }
            }
        }
        Self { positions, rotations }
    }
}

impl Skeleton {
    /// World position of every joint, in skeleton order.
    pub fn positions(&self, pose: &Pose) -> Vec<Vec3> {
        WorldPose::compute(self, pose).positions
    }
}

impl MotionClip {
    /// World positions of every joint for every frame.
    pub fn positions(&self) -> Vec<Vec<Vec3>> {
        self.frames().iter().map(|p| self.skeleton().positions(p)).collect()
    }
}

/// World position of every joint at `frame_index`, keyed by joint name.
pub fn forward_kinematics(clip: &MotionClip, frame_index: usize) -> Result<BTreeMap<String, Vec3>, MotionError> {
    let pose = clip.frame(frame_index)?;
    let skel = clip.skeleton();
    Ok(skel
        .positions(pose)
        .into_iter()
        .enumerate()
        .map(|(i, p)| (skel.joint(i).name.clone(), p))
        .collect())
}
