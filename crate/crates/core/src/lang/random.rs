//! Random ASTs for round-trip and robustness testing.

use rand::Rng;

use super::ast::{FrameRef, JointConstraint, Meo, MeoProgram};
use super::validate::validate_meo;
use super::vocab::{ExplicitFrame, Extremum, Joint, RotationVerb, TemporalRelation, TranslationDir, Vocabulary};
use crate::motion::MotionClip;

fn pick<T: Vocabulary>(rng: &mut impl Rng) -> T {
    T::ALL[rng.random_range(0..T::ALL.len())]
}

/// Absent half the time; otherwise log-uniform over [1e-3, 1e3].
fn magnitude(rng: &mut impl Rng) -> Option<f64> {
    rng.random_bool(0.5).then(|| 10f64.powf(rng.random_range(-3.0..3.0)))
}

pub fn random_constraint(rng: &mut impl Rng) -> JointConstraint {
    let joint = pick::<Joint>(rng);
    if rng.random_bool(0.5) {
        JointConstraint::rotate(joint, pick::<RotationVerb>(rng), magnitude(rng))
    } else {
        let rel = rng.random_bool(0.3).then(|| pick::<Joint>(rng));
        JointConstraint::translate(joint, pick::<TranslationDir>(rng), rel, magnitude(rng))
    }
}

/// Index references are drawn below `max_index`.
pub fn random_frame_ref(rng: &mut impl Rng, max_index: usize) -> FrameRef {
    match rng.random_range(0..3) {
        0 => FrameRef::explicit(pick::<ExplicitFrame>(rng)),
        1 => FrameRef::when(pick::<Joint>(rng), pick::<Extremum>(rng), pick::<TemporalRelation>(rng)),
        _ => FrameRef::Index { frame: rng.random_range(0..max_index.max(1)) },
    }
}

/// Any syntactically well-formed program with up to `max_len` MEOs.
pub fn random_program(rng: &mut impl Rng, max_len: usize) -> MeoProgram {
    let n = rng.random_range(0..=max_len);
    MeoProgram::new((0..n).map(|_| Meo::new(random_constraint(rng), random_frame_ref(rng, 10_000))).collect())
}

/// A non-empty program that passes validation against `clip`. Each MEO is
/// redrawn until the one-MEO program validates.
pub fn random_valid_program(rng: &mut impl Rng, clip: &MotionClip, max_len: usize) -> MeoProgram {
    let n = rng.random_range(1..=max_len.max(1));
    let ops = (0..n)
        .map(|_| loop {
            let m = Meo::new(random_constraint(rng), random_frame_ref(rng, clip.len()));
            if validate_meo(&MeoProgram::new(vec![m.clone()]), clip).is_empty() {
                break m;
            }
        })
        .collect();
    MeoProgram::new(ops)
}
