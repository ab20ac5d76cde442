//! JSON clip documents.
//!
//! ```json
//! { "fps": 24,
//!   "skeleton": [{"name": "waist", "parent": null, "offset": [0, 0, 0]}, ...],
//!   "frames": [{"root": [x, y, z], "rotations": {"waist": [w, x, y, z], ...}}, ...] }
//! ```
//! Unknown fields are rejected. Quaternions within 1e-3 of unit norm are
//! accepted and renormalized.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::Quaternion;
use serde::{Deserialize, Serialize};

use super::{JointSpec, MotionClip, MotionError, Pose, Quat, Skeleton, Vec3};

const LOAD_NORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ClipDoc {
    fps: u32,
    skeleton: Vec<JointDoc>,
    frames: Vec<FrameDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    name: String,
    parent: Option<String>,
    offset: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    root: [f64; 3],
    rotations: BTreeMap<String, [f64; 4]>,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> MotionError {
    MotionError::Validation { field: field.into(), message: message.into() }
}

/// Parses a JSON clip document.
pub fn load_clip(bytes: &[u8]) -> Result<MotionClip, MotionError> {
    let doc: ClipDoc = serde_json::from_slice(bytes).map_err(|e| invalid("document", e.to_string()))?;
    clip_from_doc(doc)
}

/// Parses a clip from an already-decoded JSON value.
pub fn clip_from_json(value: serde_json::Value) -> Result<MotionClip, MotionError> {
    let doc: ClipDoc = serde_json::from_value(value).map_err(|e| invalid("document", e.to_string()))?;
    clip_from_doc(doc)
}

fn clip_from_doc(doc: ClipDoc) -> Result<MotionClip, MotionError> {
    if doc.fps == 0 {
        return Err(invalid("fps", "must be positive"));
    }
    let specs = doc
        .skeleton
        .iter()
        .map(|j| JointSpec {
            name: j.name.clone(),
            parent: j.parent.clone(),
            offset: Vec3::from(j.offset),
        })
        .collect();
    let skeleton = Arc::new(Skeleton::new(specs).map_err(|e| invalid("skeleton", e.to_string()))?);
    if doc.frames.len() < 2 {
        return Err(invalid("frames", format!("need at least 2 frames, got {}", doc.frames.len())));
    }

    let mut frames = Vec::with_capacity(doc.frames.len());
    for (fi, f) in doc.frames.into_iter().enumerate() {
        if !f.root.iter().all(|v| v.is_finite()) {
            return Err(invalid(format!("frames[{fi}].root"), "not finite"));
        }
        for name in f.rotations.keys() {
            if skeleton.index_of(name).is_none() {
                return Err(invalid(format!("frames[{fi}].rotations.{name}"), format!("unknown joint `{name}`")));
            }
        }
        let mut rotations = Vec::with_capacity(skeleton.len());
        for spec in skeleton.joints() {
            let field = format!("frames[{fi}].rotations.{}", spec.name);
            let [w, x, y, z] = *f.rotations.get(&spec.name).ok_or_else(|| invalid(&field, "missing rotation"))?;
            let q = Quaternion::new(w, x, y, z);
            let n = q.norm();
            if !n.is_finite() || (n - 1.0).abs() > LOAD_NORM_TOLERANCE {
                return Err(invalid(&field, format!("quaternion norm {n} is not within {LOAD_NORM_TOLERANCE} of 1")));
            }
            // Leave already-unit values bit-identical so documents round-trip.
            rotations.push(if (n - 1.0).abs() < 1e-12 { Quat::new_unchecked(q) } else { Quat::new_normalize(q) });
        }
        frames.push(Pose::new(Vec3::from(f.root), rotations).map_err(|e| invalid(format!("frames[{fi}]"), e.to_string()))?);
    }
    MotionClip::new(skeleton, frames, doc.fps).map_err(|e| invalid("frames", e.to_string()))
}

pub(crate) fn clip_to_doc(clip: &MotionClip) -> ClipDoc {
    let skel = clip.skeleton();
    ClipDoc {
        fps: clip.fps(),
        skeleton: skel
            .joints()
            .iter()
            .map(|j| JointDoc { name: j.name.clone(), parent: j.parent.clone(), offset: j.offset.into() })
            .collect(),
        frames: clip
            .frames()
            .iter()
            .map(|p| FrameDoc {
                root: p.root_translation.into(),
                rotations: skel
                    .joints()
                    .iter()
                    .zip(p.rotations())
                    .map(|(j, q)| (j.name.clone(), [q.w, q.i, q.j, q.k]))
                    .collect(),
            })
            .collect(),
    }
}

/// Serializes a clip to its canonical JSON form.
pub fn save_clip(clip: &MotionClip) -> Vec<u8> {
    serde_json::to_vec(&clip_to_doc(clip)).expect("clip documents always serialize")
}

/// The clip as a JSON value (same schema as [`save_clip`]).
pub fn clip_to_json(clip: &MotionClip) -> serde_json::Value {
    serde_json::to_value(clip_to_doc(clip)).expect("clip documents always serialize")
}
