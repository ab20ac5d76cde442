use serde::{Deserialize, Serialize};

use super::ast::{ConstraintKind, FrameRef, MeoProgram};
use super::vocab::{Joint, Side, Vocabulary};
use crate::keyframe::VerbAxisTable;
use crate::motion::MotionClip;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// A name the clip's skeleton does not provide.
    Vocabulary,
    /// A frame index outside the clip.
    Range,
    /// Well-formed but not executable (inapplicable verb, bad magnitude...).
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Index of the offending MEO in the program.
    pub op: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "op {}: {}", self.op, self.message)
    }
}

/// Clip-independent checks: verb applicability, lateral directions on
/// midline joints, self-relative translations and magnitudes.
pub fn validate_program_shape(program: &MeoProgram) -> Vec<Diagnostic> {
    let table = VerbAxisTable::standard();
    let mut out = Vec::new();
    let mut semantic = |op: usize, message: String| out.push(Diagnostic { op, kind: DiagnosticKind::Semantic, message });
    for (i, m) in program.ops.iter().enumerate() {
        let joint = m.constraint.joint;
        match &m.constraint.kind {
            ConstraintKind::Rotate { verb, magnitude_deg } => {
                if table.axis(joint, *verb).is_none() {
                    semantic(i, format!("`{verb}` is not defined for joint `{joint}`"));
                }
                if let Some(v) = magnitude_deg {
                    if !(v.is_finite() && *v > 0.0) {
                        semantic(i, format!("rotation magnitude {v} must be finite and positive"));
                    }
                }
            }
            ConstraintKind::Translate { dir, relative_to, magnitude_m } => {
                if dir.is_lateral() && joint.side() == Side::Midline {
                    semantic(i, format!("`{dir}` is undefined for midline joint `{joint}`"));
                }
                if *relative_to == Some(joint) {
                    semantic(i, format!("joint `{joint}` cannot be placed relative to itself"));
                }
                if let Some(v) = magnitude_m {
                    if !(v.is_finite() && *v > 0.0) {
                        semantic(i, format!("translation magnitude {v} must be finite and positive"));
                    }
                }
            }
        }
    }
    out
}

/// Checks a program against a clip. Empty result means executable.
pub fn validate_meo(program: &MeoProgram, clip: &MotionClip) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let skel = clip.skeleton();
    for (i, m) in program.ops.iter().enumerate() {
        let mut joints: Vec<Joint> = vec![m.constraint.joint];
        if let ConstraintKind::Translate { relative_to: Some(r), .. } = m.constraint.kind {
            joints.push(r);
        }
        match m.frame {
            FrameRef::Implicit { anchor, .. } => joints.push(anchor),
            FrameRef::Index { frame } if frame >= clip.len() => out.push(Diagnostic {
                op: i,
                kind: DiagnosticKind::Range,
                message: format!("frame {frame} out of range 0..{}", clip.last_index()),
            }),
            _ => {}
        }
        for j in joints {
            if skel.index_of(j.as_str()).is_none() {
                out.push(Diagnostic {
                    op: i,
                    kind: DiagnosticKind::Vocabulary,
                    message: format!("unknown joint `{j}` for this skeleton"),
                });
            }
        }
    }
    out.extend(validate_program_shape(program));
    out.sort_by_key(|d| d.op);
    out
}
