use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::keyframe::{direction_vector, resolve_frame, EditConfig, VerbAxisTable};
use crate::lang::{ConstraintKind, Meo, MeoProgram, Vocabulary};
use crate::motion::{yaw_of, MotionClip, Vec3};

/// Fraction of the requested magnitude an edit must achieve.
pub const FIDELITY_THRESHOLD: f64 = 0.5;

/// Binary check that an edited clip carries out one MEO.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTest {
    pub meo: Meo,
    pub description: String,
    config: EditConfig,
}

/// What a fidelity test measured. For relative translations `achieved` is the
/// signed separation from the reference joint and `required` is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityMeasure {
    pub frame_index: usize,
    pub achieved: f64,
    pub required: f64,
    pub passed: bool,
}

pub fn fidelity_test_for(meo: &Meo, config: &EditConfig) -> FidelityTest {
    let c = &meo.constraint;
    let description = match c.kind {
        ConstraintKind::Rotate { verb, magnitude_deg } => format!(
            "{} {verb} angle changes by at least {:.1} deg",
            c.joint,
            FIDELITY_THRESHOLD * magnitude_deg.unwrap_or(config.default_rotation_deg)
        ),
        ConstraintKind::Translate { dir, relative_to: Some(rel), .. } => {
            format!("{} is {dir} of {rel}", c.joint)
        }
        ConstraintKind::Translate { dir, relative_to: None, magnitude_m } => format!(
            "{} moves {dir} by at least {:.3} m",
            c.joint,
            FIDELITY_THRESHOLD * magnitude_m.unwrap_or(config.default_translation_m)
        ),
    };
    FidelityTest { meo: meo.clone(), description, config: config.clone() }
}

impl FidelityTest {
    /// Evaluates at the MEO's frame resolved on `source`; `entire_motion`
    /// is checked at the middle frame.
    pub fn measure(&self, source: &MotionClip, edited: &MotionClip) -> Result<FidelityMeasure, EvalError> {
        if source.len() != edited.len() {
            return Err(EvalError::Shape(format!("{} vs {} frames", source.len(), edited.len())));
        }
        let frame = resolve_frame(source, &self.meo.frame, &self.config)?.frame_index;
        let skel = source.skeleton();
        let c = &self.meo.constraint;
        let j = skel
            .index_of(c.joint.as_str())
            .ok_or_else(|| EvalError::Shape(format!("no joint `{}`", c.joint)))?;
        let (ps, pe) = (&source.frames()[frame], &edited.frames()[frame]);
        let heading = yaw_of(&ps.rotation(skel.root()));

        let (achieved, required) = match c.kind {
            ConstraintKind::Rotate { verb, magnitude_deg } => {
                let axis = VerbAxisTable::standard()
                    .axis(c.joint, verb)
                    .ok_or_else(|| EvalError::Shape(format!("`{verb}` not applicable to `{}`", c.joint)))?;
                let axis: Vec3 = if j == skel.root() { heading * axis } else { axis }.normalize();
                let delta = pe.rotation(j) * ps.rotation(j).inverse();
                let angle = delta.scaled_axis().dot(&axis).to_degrees();
                (angle, FIDELITY_THRESHOLD * magnitude_deg.unwrap_or(self.config.default_rotation_deg))
            }
            ConstraintKind::Translate { dir, relative_to, magnitude_m } => {
                let unit = direction_vector(dir, c.joint, &heading);
                let xe = skel.positions(pe);
                match relative_to {
                    Some(rel) => {
                        let r = skel
                            .index_of(rel.as_str())
                            .ok_or_else(|| EvalError::Shape(format!("no joint `{rel}`")))?;
                        ((xe[j] - xe[r]).dot(&unit), 0.0)
                    }
                    None => {
                        let xs = skel.positions(ps);
                        let m = magnitude_m.unwrap_or(self.config.default_translation_m);
                        ((xe[j] - xs[j]).dot(&unit), FIDELITY_THRESHOLD * m)
                    }
                }
            }
        };
        let passed = if required > 0.0 { achieved >= required } else { achieved > required };
        Ok(FidelityMeasure { frame_index: frame, achieved, required, passed })
    }

    pub fn evaluate(&self, source: &MotionClip, edited: &MotionClip) -> Result<bool, EvalError> {
        Ok(self.measure(source, edited)?.passed)
    }
}

/// One edited clip and the program that produced it.
#[derive(Debug, Clone)]
pub struct FidelityItem {
    pub program: MeoProgram,
    pub source: MotionClip,
    pub edited: MotionClip,
}

/// Mean pass rate over every (MEO, clip) pair. Tests that cannot be evaluated
/// count as failures; an empty input scores 0.
pub fn fidelity_auto(items: &[FidelityItem], config: &EditConfig) -> f64 {
    let mut total = 0usize;
    let mut passed = 0usize;
    for item in items {
        for meo in &item.program.ops {
            total += 1;
            if fidelity_test_for(meo, config).evaluate(&item.source, &item.edited).unwrap_or(false) {
                passed += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        passed as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyframe::execute_meo_keyframes;
    use crate::lang::parse_meo;
    use crate::synth::{MotionFamily, SynthParams};

    fn edit(src: &MotionClip, prog: &str) -> (MeoProgram, MotionClip) {
        let p = parse_meo(prog).unwrap();
        let e = execute_meo_keyframes(src, &p, &EditConfig::default()).unwrap();
        (p, e.keyed_clip())
    }

    fn check(prog: &MeoProgram, src: &MotionClip, edited: &MotionClip) -> bool {
        fidelity_test_for(&prog.ops[0], &EditConfig::default()).evaluate(src, edited).unwrap()
    }

    #[test]
    fn waist_up_passes_and_null_fails() {
        let src = SynthParams::canonical(MotionFamily::Squat).generate();
        let (p, edited) = edit(&src, "translate(waist, up) @ when(waist, lowest, at)");
        assert!(check(&p, &src, &edited));
        assert!(!check(&p, &src, &src));
    }

    #[test]
    fn opposite_direction_fails() {
        let src = SynthParams::canonical(MotionFamily::Squat).generate();
        let (_, down) = edit(&src, "translate(waist, down) @ middle");
        let up = parse_meo("translate(waist, up) @ middle").unwrap();
        assert!(!check(&up, &src, &down));
        let (_, ext) = edit(&src, "rotate(right_knee, extend) @ middle");
        let flex = parse_meo("rotate(right_knee, flex) @ middle").unwrap();
        assert!(!check(&flex, &src, &ext));
        assert!(check(&parse_meo("rotate(right_knee, extend) @ middle").unwrap(), &src, &ext));
    }

    #[test]
    fn rotations_on_every_applicable_pair() {
        let src = SynthParams::canonical(MotionFamily::Kick).generate();
        let table = VerbAxisTable::standard();
        for (joint, verb) in table.entries().filter(|e| e.2.is_some()).map(|e| (e.0, e.1)) {
            let (p, edited) = edit(&src, &format!("rotate({joint}, {verb}) @ start"));
            assert!(check(&p, &src, &edited), "{joint} {verb}");
        }
    }

    #[test]
    fn relative_translation_ordering() {
        let src = SynthParams::canonical(MotionFamily::Squat).generate();
        let (p, edited) = edit(&src, "translate(right_hand, up, head) @ start");
        assert!(check(&p, &src, &edited));
        assert!(!check(&p, &src, &src));
    }

    #[test]
    fn auto_averages() {
        let src = SynthParams::canonical(MotionFamily::Squat).generate();
        let (p, edited) = edit(&src, "translate(waist, up) @ start; translate(waist, up) @ end");
        let cfg = EditConfig::default();
        let all = FidelityItem { program: p.clone(), source: src.clone(), edited: edited.clone() };
        assert_eq!(fidelity_auto(&[all.clone()], &cfg), 1.0);
        let none = FidelityItem { program: p, source: src.clone(), edited: src };
        assert_eq!(fidelity_auto(&[all, none], &cfg), 0.5);
        assert_eq!(fidelity_auto(&[], &cfg), 0.0);
    }
}
