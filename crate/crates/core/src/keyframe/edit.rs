use std::collections::BTreeSet;

use super::ik::{solve_ik, ChainDof};
use super::{EditConfig, EditError, VerbAxisTable};
use crate::lang::{Joint, RotationVerb, Side, TranslationDir, Vocabulary};
use crate::motion::{yaw_of, MotionClip, Pose, Quat, Skeleton, Vec3};

/// An edited pose at one frame, with the joints whose constraints produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EditedKeyframe {
    pub frame_index: usize,
    pub pose: Pose,
    pub touched_joints: BTreeSet<Joint>,
    /// Largest IK end-effector residual among the edits, meters.
    pub residual: Option<f64>,
    pub warnings: Vec<String>,
}

impl EditedKeyframe {
    pub(crate) fn new(frame_index: usize, pose: Pose, joint: Joint) -> Self {
        Self {
            frame_index,
            pose,
            touched_joints: BTreeSet::from([joint]),
            residual: None,
            warnings: Vec::new(),
        }
    }
}

fn joint_index(skel: &Skeleton, joint: Joint) -> Result<usize, EditError> {
    skel.index_of(joint.as_str()).ok_or_else(|| EditError::UnknownJoint(joint.to_string()))
}

/// Rotates `joint` in its parent frame by `magnitude_deg` about the verb's axis.
pub(crate) fn rotate_pose(
    skel: &Skeleton,
    pose: &Pose,
    joint: Joint,
    verb: RotationVerb,
    magnitude_deg: f64,
) -> Result<Pose, EditError> {
    let axis = VerbAxisTable::standard()
        .axis(joint, verb)
        .ok_or_else(|| EditError::Inapplicable { joint: joint.to_string(), verb: verb.to_string() })?;
    let j = joint_index(skel, joint)?;
    let mut out = pose.clone();
    if magnitude_deg != 0.0 {
        // the root has no parent; its axes live in the heading frame
        let axis = if j == skel.root() { yaw_of(&pose.rotation(j)) * axis } else { axis };
        let delta = Quat::from_axis_angle(&nalgebra::Unit::new_normalize(axis), magnitude_deg.to_radians());
        out.set_rotation(j, delta * pose.rotation(j));
    }
    Ok(out)
}

pub fn apply_rotation(
    clip: &MotionClip,
    frame_index: usize,
    joint: Joint,
    verb: RotationVerb,
    magnitude_deg: f64,
) -> Result<EditedKeyframe, EditError> {
    let pose = rotate_pose(clip.skeleton(), clip.frame(frame_index)?, joint, verb, magnitude_deg)?;
    Ok(EditedKeyframe::new(frame_index, pose, joint))
}

/// World-space unit vector for `dir`, in the character's heading frame.
/// `in`/`out` point towards/away from the sagittal plane on `joint`'s side.
pub fn direction_vector(dir: TranslationDir, joint: Joint, heading: &Quat) -> Vec3 {
    let forward = heading * Vec3::z();
    let left = heading * Vec3::x();
    let outward = match joint.side() {
        Side::Left => left,
        Side::Right => -left,
        Side::Midline => Vec3::zeros(),
    };
    match dir {
        TranslationDir::Up => Vec3::y(),
        TranslationDir::Down => -Vec3::y(),
        TranslationDir::Forward => forward,
        TranslationDir::Backward => -forward,
        TranslationDir::Out => outward,
        TranslationDir::In => -outward,
    }
}

/// Degrees of freedom IK may use to move `joint`. The waist is moved by
/// translating the root directly and has no chain.
pub fn ik_chain(skel: &Skeleton, joint: Joint) -> Result<Vec<ChainDof>, EditError> {
    let side = match joint.side() {
        Side::Right => "right",
        Side::Left => "left",
        Side::Midline => "",
    };
    let names: Vec<String> = match joint {
        Joint::RightHand | Joint::LeftHand => vec![format!("{side}_shoulder"), format!("{side}_elbow")],
        Joint::RightElbow | Joint::LeftElbow => {
            vec!["spine".into(), format!("{side}_clavicle"), format!("{side}_shoulder")]
        }
        Joint::RightShoulder | Joint::LeftShoulder => vec!["spine".into(), format!("{side}_clavicle")],
        Joint::RightFoot | Joint::LeftFoot => vec![format!("{side}_hip"), format!("{side}_knee")],
        Joint::RightKnee | Joint::LeftKnee => vec![format!("{side}_hip")],
        Joint::RightHip | Joint::LeftHip => return Ok(vec![ChainDof::RootTranslation]),
        Joint::Head => vec!["spine".into(), "neck".into()],
        Joint::Waist => return Ok(vec![ChainDof::RootTranslation]),
    };
    names
        .iter()
        .map(|n| skel.index_of(n).map(ChainDof::Rotation).ok_or_else(|| EditError::NoChain(joint.to_string())))
        .collect()
}

/// Moves `joint` along `dir` (or next to `relative_to`); returns the pose and IK residual.
pub(crate) fn translate_pose(
    skel: &Skeleton,
    pose: &Pose,
    joint: Joint,
    dir: TranslationDir,
    relative_to: Option<Joint>,
    magnitude_m: Option<f64>,
    config: &EditConfig,
) -> Result<(Pose, f64), EditError> {
    let j = joint_index(skel, joint)?;
    let positions = skel.positions(pose);
    let heading = yaw_of(&pose.rotation(skel.root()));
    let unit = direction_vector(dir, joint, &heading);
    let target = match relative_to {
        Some(rel) => {
            let r = joint_index(skel, rel)?;
            positions[r] + unit * magnitude_m.unwrap_or(config.default_relative_offset_m)
        }
        None => positions[j] + unit * magnitude_m.unwrap_or(config.default_translation_m),
    };
    if target == positions[j] {
        return Ok((pose.clone(), 0.0));
    }
    if joint == Joint::Waist {
        let mut out = pose.clone();
        out.root_translation += target - positions[j];
        return Ok((out, 0.0));
    }
    let chain = ik_chain(skel, joint)?;
    let outcome = solve_ik(skel, pose, j, &chain, target, &config.ik);
    Ok((outcome.pose, outcome.residual))
}

pub fn apply_translation(
    clip: &MotionClip,
    frame_index: usize,
    joint: Joint,
    dir: TranslationDir,
    relative_to: Option<Joint>,
    magnitude_m: Option<f64>,
    config: &EditConfig,
) -> Result<EditedKeyframe, EditError> {
    let (pose, residual) =
        translate_pose(clip.skeleton(), clip.frame(frame_index)?, joint, dir, relative_to, magnitude_m, config)?;
    let mut kf = EditedKeyframe::new(frame_index, pose, joint);
    kf.residual = Some(residual);
    if residual > config.ik.tolerance {
        kf.warnings.push(format!("unreachable, residual {residual:.4} m"));
    }
    Ok(kf)
}
