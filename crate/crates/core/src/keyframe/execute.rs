use std::collections::BTreeMap;

use super::edit::{rotate_pose, translate_pose, EditedKeyframe};
use super::resolve::{resolve_frame, ResolvedFrame};
use super::{EditConfig, EditError};
use crate::lang::{validate_meo, ConstraintKind, Meo, MeoProgram};
use crate::motion::{MotionClip, Pose};

/// Result of applying a program's constraints to keyframes.
#[derive(Debug, Clone)]
pub struct KeyframeEdits {
    /// The input clip with every `entire_motion` constraint applied to all frames.
    pub base: MotionClip,
    /// Edited keyframes, sorted by frame index.
    pub keyframes: Vec<EditedKeyframe>,
    /// One entry per MEO, in program order.
    pub resolved: Vec<ResolvedFrame>,
    pub warnings: Vec<String>,
}

impl KeyframeEdits {
    /// The base clip with the keyframe poses written in, without infilling.
    pub fn keyed_clip(&self) -> MotionClip {
        let mut frames = self.base.frames().to_vec();
        for kf in &self.keyframes {
            frames[kf.frame_index] = kf.pose.clone();
        }
        self.base.with_frames(frames).expect("keyframes come from this clip")
    }

    pub fn key_indices(&self) -> Vec<usize> {
        self.keyframes.iter().map(|k| k.frame_index).collect()
    }
}

fn apply_one(clip: &MotionClip, pose: &Pose, meo: &Meo, config: &EditConfig) -> Result<(Pose, f64), EditError> {
    let skel = clip.skeleton();
    let c = &meo.constraint;
    match c.kind {
        ConstraintKind::Rotate { verb, magnitude_deg } => {
            let deg = magnitude_deg.unwrap_or(config.default_rotation_deg);
            Ok((rotate_pose(skel, pose, c.joint, verb, deg)?, 0.0))
        }
        ConstraintKind::Translate { dir, relative_to, magnitude_m } => {
            translate_pose(skel, pose, c.joint, dir, relative_to, magnitude_m, config)
        }
    }
}

/// Resolves and applies each MEO in order. Constraints landing on the same
/// frame compose on one pose.
pub fn execute_meo_keyframes(
    clip: &MotionClip,
    program: &MeoProgram,
    config: &EditConfig,
) -> Result<KeyframeEdits, EditError> {
    if program.is_empty() {
        return Err(EditError::EmptyProgram);
    }
    let diagnostics = validate_meo(program, clip);
    if !diagnostics.is_empty() {
        return Err(EditError::Invalid(diagnostics));
    }

    let mut base = clip.clone();
    let mut keys: BTreeMap<usize, EditedKeyframe> = BTreeMap::new();
    let mut resolved = Vec::with_capacity(program.len());
    let mut warnings = Vec::new();
    let note = |op: usize, residual: f64, frame: usize, warnings: &mut Vec<String>| {
        if residual > config.ik.tolerance {
            warnings.push(format!("op {op}: frame {frame}: unreachable, residual {residual:.4} m"));
        }
    };

    for (op, meo) in program.ops.iter().enumerate() {
        let r = resolve_frame(&base, &meo.frame, config)?;
        if r.covers_all_frames() {
            let mut frames = Vec::with_capacity(base.len());
            for (i, pose) in base.frames().iter().enumerate() {
                let (p, residual) = apply_one(&base, pose, meo, config)?;
                note(op, residual, i, &mut warnings);
                frames.push(p);
            }
            for kf in keys.values_mut() {
                let (p, residual) = apply_one(&base, &kf.pose, meo, config)?;
                note(op, residual, kf.frame_index, &mut warnings);
                kf.pose = p;
                kf.touched_joints.insert(meo.constraint.joint);
            }
            base = base.with_frames(frames)?;
        } else {
            let i = r.frame_index;
            let current = keys.get(&i).map(|k| k.pose.clone()).unwrap_or_else(|| base.frames()[i].clone());
            let (p, residual) = apply_one(&base, &current, meo, config)?;
            note(op, residual, i, &mut warnings);
            let kf = keys.entry(i).or_insert_with(|| EditedKeyframe::new(i, p.clone(), meo.constraint.joint));
            kf.pose = p;
            kf.touched_joints.insert(meo.constraint.joint);
            if matches!(meo.constraint.kind, ConstraintKind::Translate { .. }) {
                kf.residual = Some(kf.residual.unwrap_or(0.0).max(residual));
            }
            if residual > config.ik.tolerance {
                kf.warnings.push(format!("unreachable, residual {residual:.4} m"));
            }
        }
        resolved.push(r);
    }

    Ok(KeyframeEdits { base, keyframes: keys.into_values().collect(), resolved, warnings })
}
