use serde::{Deserialize, Serialize};

use super::vocab::{ExplicitFrame, Extremum, Joint, RotationVerb, TemporalRelation, TranslationDir};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintKind {
    /// Parent-frame rotation of the joint.
    Rotate {
        verb: RotationVerb,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        magnitude_deg: Option<f64>,
    },
    /// World-frame translation, optionally placed relative to another joint.
    Translate {
        dir: TranslationDir,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        relative_to: Option<Joint>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        magnitude_m: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointConstraint {
    pub joint: Joint,
    pub kind: ConstraintKind,
}

impl JointConstraint {
    pub fn rotate(joint: Joint, verb: RotationVerb, magnitude_deg: Option<f64>) -> Self {
        Self { joint, kind: ConstraintKind::Rotate { verb, magnitude_deg } }
    }

    pub fn translate(joint: Joint, dir: TranslationDir, relative_to: Option<Joint>, magnitude_m: Option<f64>) -> Self {
        Self { joint, kind: ConstraintKind::Translate { dir, relative_to, magnitude_m } }
    }

    pub fn magnitude(&self) -> Option<f64> {
        match self.kind {
            ConstraintKind::Rotate { magnitude_deg, .. } => magnitude_deg,
            ConstraintKind::Translate { magnitude_m, .. } => magnitude_m,
        }
    }

    /// Same constraint with its magnitude replaced.
    pub fn with_magnitude(mut self, m: Option<f64>) -> Self {
        match &mut self.kind {
            ConstraintKind::Rotate { magnitude_deg, .. } => *magnitude_deg = m,
            ConstraintKind::Translate { magnitude_m, .. } => *magnitude_m = m,
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrameRef {
    Explicit { frame: ExplicitFrame },
    /// The frame where `anchor` reaches `extremum`, shifted by `relation`.
    Implicit { relation: TemporalRelation, anchor: Joint, extremum: Extremum },
    Index { frame: usize },
}

impl FrameRef {
    pub fn explicit(frame: ExplicitFrame) -> Self {
        Self::Explicit { frame }
    }

    pub fn when(anchor: Joint, extremum: Extremum, relation: TemporalRelation) -> Self {
        Self::Implicit { relation, anchor, extremum }
    }

    pub fn is_entire_motion(&self) -> bool {
        matches!(self, FrameRef::Explicit { frame: ExplicitFrame::EntireMotion })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meo {
    pub constraint: JointConstraint,
    pub frame: FrameRef,
}

impl Meo {
    pub fn new(constraint: JointConstraint, frame: FrameRef) -> Self {
        Self { constraint, frame }
    }
}

/// An ordered list of MEOs; order is execution order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeoProgram {
    pub ops: Vec<Meo>,
}

impl MeoProgram {
    pub fn new(ops: Vec<Meo>) -> Self {
        Self { ops }
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }
}

impl std::fmt::Display for MeoProgram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&super::print_meo(self))
    }
}

impl std::str::FromStr for MeoProgram {
    type Err = super::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        super::parse_meo(s)
    }
}
