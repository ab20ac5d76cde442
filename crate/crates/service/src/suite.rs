//! The curated single-MEO suite used to check that each supported edit class
//! does what it says when executed by an engine.
//!
//! Classes: every applicable rotation, waist translation in every direction,
//! and hand/foot translations (absolute or next to another joint) whose
//! target lies within the limb's reach.

use meo_core::eval::{fidelity_test_for, FidelityMeasure};
use meo_core::keyframe::{direction_vector, resolve_frame, EditConfig, VerbAxisTable};
use meo_core::lang::{
    print_meo, validate_meo, ConstraintKind, ExplicitFrame, Extremum, FrameRef, Joint, JointConstraint, Meo,
    MeoProgram, RotationVerb, TemporalRelation, TranslationDir, Vocabulary,
};
use meo_core::motion::yaw_of;
use meo_core::synth::{MotionFamily, SynthParams};
use meo_core::MotionClip;
use meo_infill::{Engine, EngineConfig, InfillError};
use serde::{Deserialize, Serialize};

/// Targets further than this fraction of the limb length are left out.
pub const REACH_MARGIN: f64 = 0.9;

const LIMBS: [Joint; 4] = [Joint::LeftHand, Joint::RightHand, Joint::LeftFoot, Joint::RightFoot];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeoClass {
    Rotate,
    TranslateWaist,
    TranslateLimb,
    TranslateRelative,
}

impl MeoClass {
    pub fn of(c: &JointConstraint) -> Self {
        match c.kind {
            ConstraintKind::Rotate { .. } => Self::Rotate,
            ConstraintKind::Translate { relative_to: Some(_), .. } => Self::TranslateRelative,
            ConstraintKind::Translate { .. } if c.joint == Joint::Waist => Self::TranslateWaist,
            ConstraintKind::Translate { .. } => Self::TranslateLimb,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub family: MotionFamily,
    pub clip: MotionClip,
    pub program: MeoProgram,
    pub class: MeoClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub family: MotionFamily,
    pub program: String,
    pub class: MeoClass,
    pub measure: Option<FidelityMeasure>,
    pub error: Option<String>,
}

impl CaseResult {
    pub fn passed(&self) -> bool {
        self.measure.is_some_and(|m| m.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub variant: String,
    pub cases: usize,
    pub passed: usize,
    pub pass_rate: f64,
    pub failures: Vec<CaseResult>,
}

/// The middle frame and the family's characteristic moment.
fn frames(family: MotionFamily) -> [FrameRef; 2] {
    let (anchor, extremum) = match family {
        MotionFamily::Squat => (Joint::Waist, Extremum::Lowest),
        MotionFamily::Jump => (Joint::Waist, Extremum::Highest),
        MotionFamily::Kick => (Joint::RightFoot, Extremum::Highest),
        MotionFamily::ArmRaise => (Joint::LeftHand, Extremum::Highest),
    };
    [FrameRef::explicit(ExplicitFrame::Middle), FrameRef::when(anchor, extremum, TemporalRelation::At)]
}

/// True when the default target of a hand/foot translation is within reach
/// of the limb's root joint. Frames that cannot be resolved are excluded.
fn reachable(clip: &MotionClip, meo: &Meo, config: &EditConfig) -> bool {
    let c = &meo.constraint;
    let Ok(frame) = resolve_frame(clip, &meo.frame, config) else { return false };
    let ConstraintKind::Translate { dir, relative_to, magnitude_m } = c.kind else { return true };
    if c.joint == Joint::Waist {
        return true;
    }
    if !LIMBS.contains(&c.joint) {
        return false;
    }
    let skel = clip.skeleton();
    let pose = &clip.frames()[frame.frame_index];
    let pos = skel.positions(pose);
    let end = skel.index_of(c.joint.as_str()).expect("humanoid joint");
    let mid = skel.parent(end).expect("limb joint has a parent");
    let base = skel.parent(mid).expect("limb joint has a grandparent");
    let reach = skel.joint(end).offset.norm() + skel.joint(mid).offset.norm();
    let unit = direction_vector(dir, c.joint, &yaw_of(&pose.rotation(skel.root())));
    let target = match relative_to {
        Some(rel) => {
            let r = skel.index_of(rel.as_str()).expect("humanoid joint");
            // The reference must stay put while the limb moves.
            if skel.is_ancestor(base, r) {
                return false;
            }
            pos[r] + unit * magnitude_m.unwrap_or(config.default_relative_offset_m)
        }
        None => pos[end] + unit * magnitude_m.unwrap_or(config.default_translation_m),
    };
    (target - pos[base]).norm() <= REACH_MARGIN * reach
}

fn constraints() -> Vec<JointConstraint> {
    let table = VerbAxisTable::standard();
    let mut out = Vec::new();
    for &joint in Joint::ALL {
        for &verb in RotationVerb::ALL {
            if table.is_applicable(joint, verb) {
                out.push(JointConstraint::rotate(joint, verb, None));
            }
        }
    }
    for &dir in TranslationDir::ALL {
        out.push(JointConstraint::translate(Joint::Waist, dir, None, None));
        for limb in LIMBS {
            out.push(JointConstraint::translate(limb, dir, None, None));
            for &rel in Joint::ALL.iter().filter(|r| **r != limb) {
                out.push(JointConstraint::translate(limb, dir, Some(rel), None));
            }
        }
    }
    out
}

/// Every supported case on the canonical clip of each family, at default magnitudes.
pub fn fidelity_cases(config: &EditConfig) -> Vec<SuiteCase> {
    let all = constraints();
    let mut out = Vec::new();
    for family in MotionFamily::ALL {
        let clip = SynthParams::canonical(family).generate();
        for c in &all {
            for frame in frames(family) {
                let meo = Meo::new(c.clone(), frame);
                let program = MeoProgram::new(vec![meo.clone()]);
                if validate_meo(&program, &clip).is_empty() && reachable(&clip, &meo, config) {
                    out.push(SuiteCase { family, clip: clip.clone(), class: MeoClass::of(c), program });
                }
            }
        }
    }
    out
}

pub fn run_case(engine: &Engine, case: &SuiteCase, config: &EngineConfig) -> CaseResult {
    let (measure, error) = match engine.execute_program(&case.clip, &case.program, config) {
        Ok(out) => match fidelity_test_for(&case.program.ops[0], &config.edit).measure(&case.clip, &out.clip) {
            Ok(m) => (Some(m), None),
            Err(e) => (None, Some(e.to_string())),
        },
        Err(e) => (None, Some(InfillError::to_string(&e))),
    };
    CaseResult { family: case.family, program: print_meo(&case.program), class: case.class, measure, error }
}

pub fn run_suite(engine: &Engine, config: &EngineConfig) -> SuiteReport {
    let cases = fidelity_cases(&config.edit);
    let results: Vec<CaseResult> = cases.iter().map(|c| run_case(engine, c, config)).collect();
    let passed = results.iter().filter(|r| r.passed()).count();
    SuiteReport {
        variant: config.variant.to_string(),
        cases: results.len(),
        passed,
        pass_rate: if results.is_empty() { 0.0 } else { passed as f64 / results.len() as f64 },
        failures: results.into_iter().filter(|r| !r.passed()).collect(),
    }
}
