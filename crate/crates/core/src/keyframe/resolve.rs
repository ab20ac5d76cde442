use serde::{Deserialize, Serialize};

use super::{EditConfig, EditError};
use crate::lang::{ExplicitFrame, Extremum, FrameRef, Joint, TemporalRelation, Vocabulary};
use crate::motion::MotionClip;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameSource {
    Explicit,
    Extremum,
    Index,
    /// `entire_motion`: every frame; `frame_index` is the middle frame.
    EntireMotion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedFrame {
    pub frame_index: usize,
    pub source: FrameSource,
    /// The extremum value found, for implicit references.
    pub anchor_value: Option<f64>,
}

impl ResolvedFrame {
    pub fn covers_all_frames(&self) -> bool {
        self.source == FrameSource::EntireMotion
    }
}

const DEGENERATE: f64 = 1e-9;

/// Per-frame value an extremum is taken over: world height for
/// highest/lowest, horizontal distance from the root for furthest/closest.
pub fn extremum_values(clip: &MotionClip, joint: Joint, extremum: Extremum) -> Result<Vec<f64>, EditError> {
    let skel = clip.skeleton();
    let j = skel.index_of(joint.as_str()).ok_or_else(|| EditError::UnknownJoint(joint.to_string()))?;
    let root = skel.root();
    Ok(clip
        .frames()
        .iter()
        .map(|pose| {
            let pos = skel.positions(pose);
            match extremum {
                Extremum::Highest | Extremum::Lowest => pos[j].y,
                Extremum::Furthest | Extremum::Closest => {
                    let d = pos[j] - pos[root];
                    (d.x * d.x + d.z * d.z).sqrt()
                }
            }
        })
        .collect())
}

/// Maps a frame reference onto a concrete frame of `clip`.
pub fn resolve_frame(clip: &MotionClip, frame: &FrameRef, config: &EditConfig) -> Result<ResolvedFrame, EditError> {
    let n = clip.len();
    let last = n - 1;
    let explicit = |frame_index, source| Ok(ResolvedFrame { frame_index, source, anchor_value: None });
    match *frame {
        FrameRef::Explicit { frame } => match frame {
            ExplicitFrame::Start => explicit(0, FrameSource::Explicit),
            ExplicitFrame::End => explicit(last, FrameSource::Explicit),
            ExplicitFrame::Middle => explicit(last / 2, FrameSource::Explicit),
            ExplicitFrame::EntireMotion => explicit(last / 2, FrameSource::EntireMotion),
        },
        FrameRef::Index { frame } => {
            if frame >= n {
                return Err(crate::motion::MotionError::FrameIndex { index: frame, len: n }.into());
            }
            explicit(frame, FrameSource::Index)
        }
        FrameRef::Implicit { relation, anchor, extremum } => {
            let values = extremum_values(clip, anchor, extremum)?;
            let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if hi - lo < DEGENERATE {
                return Err(EditError::ExtremumUndefined { joint: anchor.to_string() });
            }
            let want_max = matches!(extremum, Extremum::Highest | Extremum::Furthest);
            // first frame attaining the extremum
            let mut best = 0;
            for (i, &v) in values.iter().enumerate() {
                if (want_max && v > values[best]) || (!want_max && v < values[best]) {
                    best = i;
                }
            }
            let delta = config.temporal_offset_frames;
            let frame_index = match relation {
                TemporalRelation::At => best,
                TemporalRelation::Before => best.saturating_sub(delta),
                TemporalRelation::After => (best + delta).min(last),
            };
            Ok(ResolvedFrame { frame_index, source: FrameSource::Extremum, anchor_value: Some(values[best]) })
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::motion::Skeleton;
    use crate::synth::{MotionFamily, SynthParams};

    #[test]
    fn squat_bottom() {
        let clip = SynthParams::canonical(MotionFamily::Squat).generate();
        let f = FrameRef::when(Joint::Waist, Extremum::Lowest, TemporalRelation::At);
        let r = resolve_frame(&clip, &f, &EditConfig::default()).unwrap();
        assert_eq!(r.frame_index, 30);
        assert_eq!(r.source, FrameSource::Extremum);
    }

    #[test]
    fn kick_before_apex() {
        let mut p = SynthParams::canonical(MotionFamily::Kick);
        p.peak_frame = 40;
        p.half_width = 14;
        let clip = p.generate();
        let f = FrameRef::when(Joint::RightFoot, Extremum::Highest, TemporalRelation::Before);
        assert_eq!(resolve_frame(&clip, &f, &EditConfig::default()).unwrap().frame_index, 34);
        let f = FrameRef::when(Joint::RightFoot, Extremum::Highest, TemporalRelation::After);
        assert_eq!(resolve_frame(&clip, &f, &EditConfig::default()).unwrap().frame_index, 46);
    }

    #[test]
    fn explicit_frames() {
        let clip = SynthParams::canonical(MotionFamily::Jump).generate();
        let cfg = EditConfig::default();
        let r = |f| resolve_frame(&clip, &FrameRef::explicit(f), &cfg).unwrap().frame_index;
        assert_eq!(r(ExplicitFrame::Start), 0);
        assert_eq!(r(ExplicitFrame::End), 59);
        assert_eq!(r(ExplicitFrame::Middle), 29);
        let all = resolve_frame(&clip, &FrameRef::explicit(ExplicitFrame::EntireMotion), &cfg).unwrap();
        assert!(all.covers_all_frames());
    }

    #[test]
    fn clamps_offsets() {
        let clip = SynthParams::canonical(MotionFamily::Squat).generate();
        let cfg = EditConfig { temporal_offset_frames: 100, ..Default::default() };
        let f = FrameRef::when(Joint::Waist, Extremum::Lowest, TemporalRelation::After);
        assert_eq!(resolve_frame(&clip, &f, &cfg).unwrap().frame_index, 59);
        let f = FrameRef::when(Joint::Waist, Extremum::Lowest, TemporalRelation::Before);
        assert_eq!(resolve_frame(&clip, &f, &cfg).unwrap().frame_index, 0);
    }

    #[test]
    fn constant_trajectory_is_an_error() {
        let clip = MotionClip::rest(Arc::new(Skeleton::humanoid()), 20, 24).unwrap();
        let f = FrameRef::when(Joint::Head, Extremum::Highest, TemporalRelation::At);
        assert!(matches!(resolve_frame(&clip, &f, &EditConfig::default()), Err(EditError::ExtremumUndefined { .. })));
        // the root is always at zero horizontal distance from itself
        let clip = SynthParams::canonical(MotionFamily::Squat).generate();
        let f = FrameRef::when(Joint::Waist, Extremum::Furthest, TemporalRelation::At);
        assert!(resolve_frame(&clip, &f, &EditConfig::default()).is_err());
    }
}
