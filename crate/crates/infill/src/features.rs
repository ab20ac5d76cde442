//! Flat per-frame motion features and the frame/attribute mask over them.
//!
//! Each frame is `[tx, ty, tz, sin(yaw), cos(yaw)]` followed by a 6D
//! rotation (first two matrix columns) for every joint in skeleton order.
//! The root joint's block holds its body-local rotation, `yaw^-1 * q`.

use std::ops::Range;

use meo_core::motion::{yaw_angle, yaw_from_angle, yaw_of};
use meo_core::{MotionClip, Pose, Quat, Skeleton, Vec3};
use nalgebra::{Matrix3, Rotation3};
use ndarray::Array2;

use crate::InfillError;

pub const ROOT_FEATURES: usize = 5;
pub const ROTATION_FEATURES: usize = 6;

/// Column layout for a skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MotionLayout {
    pub joints: usize,
}

impl MotionLayout {
    pub fn of(skeleton: &Skeleton) -> Self {
        Self { joints: skeleton.len() }
    }

    pub fn features(&self) -> usize {
        ROOT_FEATURES + ROTATION_FEATURES * self.joints
    }

    /// Attribute groups: the root trajectory, then one per joint rotation.
    pub fn groups(&self) -> usize {
        1 + self.joints
    }

    pub fn group_columns(&self, group: usize) -> Range<usize> {
        if group == 0 {
            0..ROOT_FEATURES
        } else {
            let s = ROOT_FEATURES + ROTATION_FEATURES * (group - 1);
            s..s + ROTATION_FEATURES
        }
    }

    pub fn joint_group(&self, joint: usize) -> usize {
        joint + 1
    }
}

pub fn rotation_to_6d(q: &Quat) -> [f64; 6] {
    let m = q.to_rotation_matrix();
    let m = m.matrix();
    [m[(0, 0)], m[(1, 0)], m[(2, 0)], m[(0, 1)], m[(1, 1)], m[(2, 1)]]
}

/// Gram-Schmidt on the two columns; degenerate input decodes to identity.
pub fn rotation_from_6d(v: &[f64]) -> Quat {
    let a1 = Vec3::new(v[0], v[1], v[2]);
    let a2 = Vec3::new(v[3], v[4], v[5]);
    let Some(b1) = a1.try_normalize(1e-12) else { return Quat::identity() };
    let Some(b2) = (a2 - b1 * b1.dot(&a2)).try_normalize(1e-12) else { return Quat::identity() };
    let b3 = b1.cross(&b2);
    let m = Matrix3::from_columns(&[b1, b2, b3]);
    Quat::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m))
}

pub fn encode_pose(skeleton: &Skeleton, pose: &Pose, row: &mut [f64]) {
    let root = skeleton.root();
    let q_root = pose.rotation(root);
    let yaw = yaw_angle(&q_root);
    let t = pose.root_translation;
    row[..ROOT_FEATURES].copy_from_slice(&[t.x, t.y, t.z, yaw.sin(), yaw.cos()]);
    let layout = MotionLayout::of(skeleton);
    for j in 0..skeleton.len() {
        let q = if j == root { yaw_of(&q_root).inverse() * q_root } else { pose.rotation(j) };
        row[layout.group_columns(layout.joint_group(j))].copy_from_slice(&rotation_to_6d(&q));
    }
}

pub fn decode_pose(skeleton: &Skeleton, row: &[f64]) -> Pose {
    let layout = MotionLayout::of(skeleton);
    let root = skeleton.root();
    let yaw = yaw_from_angle(row[3].atan2(row[4]));
    let rotations = (0..skeleton.len())
        .map(|j| {
            let q = rotation_from_6d(&row[layout.group_columns(layout.joint_group(j))]);
            if j == root {
                yaw * q
            } else {
                q
            }
        })
        .collect();
    Pose::new(Vec3::new(row[0], row[1], row[2]), rotations).expect("decoded rotations are unit")
}

/// Frames x features.
pub fn clip_to_tensor(clip: &MotionClip) -> Array2<f64> {
    let layout = MotionLayout::of(clip.skeleton());
    let mut x = Array2::zeros((clip.len(), layout.features()));
    for (i, pose) in clip.frames().iter().enumerate() {
        encode_pose(clip.skeleton(), pose, x.row_mut(i).as_slice_mut().expect("rows are contiguous"));
    }
    x
}

pub fn tensor_to_clip(template: &MotionClip, x: &Array2<f64>) -> Result<MotionClip, InfillError> {
    let layout = MotionLayout::of(template.skeleton());
    if x.dim() != (template.len(), layout.features()) {
        return Err(InfillError::Shape(format!(
            "tensor {:?} does not match clip ({}, {})",
            x.dim(),
            template.len(),
            layout.features()
        )));
    }
    let frames = x.rows().into_iter().map(|r| decode_pose(template.skeleton(), &r.to_vec())).collect();
    Ok(template.with_frames(frames)?)
}

/// Binary mask over (frame, attribute group); 1 marks conditioned values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameAttributeMask {
    layout: MotionLayout,
    bits: Array2<u8>,
}

impl FrameAttributeMask {
    pub fn zeros(frames: usize, layout: MotionLayout) -> Self {
        Self { layout, bits: Array2::zeros((frames, layout.groups())) }
    }

    pub fn ones(frames: usize, layout: MotionLayout) -> Self {
        Self { layout, bits: Array2::ones((frames, layout.groups())) }
    }

    pub fn frames(&self) -> usize {
        self.bits.nrows()
    }

    pub fn layout(&self) -> MotionLayout {
        self.layout
    }

    pub fn get(&self, frame: usize, group: usize) -> bool {
        self.bits[(frame, group)] == 1
    }

    pub fn set(&mut self, frame: usize, group: usize, on: bool) {
        self.bits[(frame, group)] = on as u8;
    }

    pub fn set_frame(&mut self, frame: usize, on: bool) {
        self.bits.row_mut(frame).fill(on as u8);
    }

    /// True when every group of the frame is conditioned.
    pub fn frame_fully_set(&self, frame: usize) -> bool {
        self.bits.row(frame).iter().all(|&b| b == 1)
    }

    pub fn count_set(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn groups(&self) -> &Array2<u8> {
        &self.bits
    }

    /// Per-feature 0/1 tensor, same shape as the motion tensor.
    pub fn expand(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.frames(), self.layout.features()));
        for f in 0..self.frames() {
            for g in 0..self.layout.groups() {
                if self.get(f, g) {
                    m.slice_mut(ndarray::s![f, self.layout.group_columns(g)]).fill(1.0);
                }
            }
        }
        m
    }

    /// `M * a + (1 - M) * b`.
    pub fn blend(&self, a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>, InfillError> {
        let m = self.expand();
        if a.dim() != m.dim() || b.dim() != m.dim() {
            return Err(InfillError::Shape(format!("mask {:?} vs tensors {:?}, {:?}", m.dim(), a.dim(), b.dim())));
        }
        Ok(&m * a + (1.0 - &m) * b)
    }
}
