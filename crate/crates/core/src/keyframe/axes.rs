use std::collections::BTreeMap;

use crate::lang::{Joint, RotationVerb, Side, Vocabulary};
use crate::motion::Vec3;

/// Rotation axis (in the joint's parent frame, rest orientation) for each
/// anatomical verb, or `None` where the verb means nothing for that joint.
///
/// Axes: +x is the character's left, +y up, +z forward. Flexion and
/// extension rotate in the sagittal plane (about x), abduction and adduction
/// in the frontal plane (about z). Left-side entries mirror the right side
/// across the sagittal plane.
#[derive(Debug, Clone, PartialEq)]
pub struct VerbAxisTable {
    entries: BTreeMap<(Joint, RotationVerb), Option<Vec3>>,
}

impl VerbAxisTable {
    pub fn standard() -> Self {
        use Joint::*;
        use RotationVerb::*;
        let x = Vec3::x();
        let z = Vec3::z();
        let mut entries = BTreeMap::new();
        for &joint in Joint::ALL {
            // flexion axis as seen on the right side of the body
            let flex = match joint {
                RightKnee | LeftKnee => Some(x),
                Head | Waist => Some(x),
                RightHip | LeftHip | RightShoulder | LeftShoulder | RightElbow | LeftElbow | RightHand
                | LeftHand | RightFoot | LeftFoot => Some(-x),
            };
            // abduction on the right side swings the limb towards -x
            let abduct_right = match joint {
                RightHip | LeftHip | RightShoulder | LeftShoulder => Some(-z),
                _ => None,
            };
            let abduct = match joint.side() {
                Side::Right => abduct_right,
                Side::Left => abduct_right.map(mirror),
                Side::Midline => None,
            };
            entries.insert((joint, Flex), flex);
            entries.insert((joint, Extend), flex.map(|a| -a));
            entries.insert((joint, Abduct), abduct);
            entries.insert((joint, Adduct), abduct.map(|a| -a));
        }
        Self { entries }
    }

    pub fn axis(&self, joint: Joint, verb: RotationVerb) -> Option<Vec3> {
        self.entries.get(&(joint, verb)).copied().flatten()
    }

    pub fn is_applicable(&self, joint: Joint, verb: RotationVerb) -> bool {
        self.axis(joint, verb).is_some()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Joint, RotationVerb, Option<Vec3>)> + '_ {
        self.entries.iter().map(|(&(j, v), a)| (j, v, *a))
    }
}

/// Reflection of a rotation axis (a pseudo-vector) across the x = 0 plane.
fn mirror(axis: Vec3) -> Vec3 {
    Vec3::new(axis.x, -axis.y, -axis.z)
}
