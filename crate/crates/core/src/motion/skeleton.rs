use std::collections::HashMap;

use super::{MotionError, Vec3};

/// Name of the root joint every skeleton must have.
pub const ROOT_JOINT: &str = "waist";

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub name: String,
    pub parent: Option<String>,
    /// Rest offset from the parent joint, in the parent's frame.
    pub offset: Vec3,
}

impl JointSpec {
    pub fn new(name: &str, parent: Option<&str>, offset: [f64; 3]) -> Self {
        Self {
            name: name.to_string(),
            parent: parent.map(str::to_string),
            offset: Vec3::new(offset[0], offset[1], offset[2]),
        }
    }
}

/// A joint tree rooted at [`ROOT_JOINT`].
///
/// Joints are stored so that every parent precedes its children, which lets
/// forward kinematics run as a single pass over the joint list.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    joints: Vec<JointSpec>,
    parents: Vec<Option<usize>>,
    index: HashMap<String, usize>,
}

impl Skeleton {
    /// Builds a skeleton, reordering joints topologically. Rejects forests,
    /// cycles, duplicate names, dangling parents and zero-length bones.
    pub fn new(specs: Vec<JointSpec>) -> Result<Self, MotionError> {
        let err = |m: String| Err(MotionError::Skeleton(m));
        if specs.is_empty() {
            return err("no joints".into());
        }
        let mut seen = HashMap::new();
        for (i, s) in specs.iter().enumerate() {
            if seen.insert(s.name.clone(), i).is_some() {
                return err(format!("duplicate joint `{}`", s.name));
            }
        }
        let roots: Vec<_> = specs.iter().filter(|s| s.parent.is_none()).collect();
        if roots.len() != 1 {
            return err(format!("expected exactly one root joint, found {}", roots.len()));
        }
        if roots[0].name != ROOT_JOINT {
            return err(format!("root joint must be `{ROOT_JOINT}`, found `{}`", roots[0].name));
        }
        for s in &specs {
            if let Some(p) = &s.parent {
                if !seen.contains_key(p) {
                    return err(format!("joint `{}` has unknown parent `{p}`", s.name));
                }
                if !(s.offset.norm() > 0.0) || !s.offset.iter().all(|v| v.is_finite()) {
                    return err(format!("bone `{}` must have a finite, positive length", s.name));
                }
            }
        }

        // Breadth-first from the root; anything left over sits on a cycle.
        let mut ordered: Vec<JointSpec> = Vec::with_capacity(specs.len());
        let mut index = HashMap::new();
        let mut frontier = vec![ROOT_JOINT.to_string()];
        while let Some(name) = frontier.pop() {
            let spec = specs[seen[&name]].clone();
            index.insert(name.clone(), ordered.len());
            ordered.push(spec);
            for s in specs.iter().rev() {
                if s.parent.as_deref() == Some(name.as_str()) {
                    frontier.push(s.name.clone());
                }
            }
        }
        if ordered.len() != specs.len() {
            return err("joint graph is not a tree (cycle detected)".into());
        }
        // Keep the caller's order where it is already topological; this makes
        // serialization stable for documents that list parents first.
        let caller_order_ok = specs.iter().enumerate().all(|(i, s)| {
            s.parent.as_ref().map_or(i == 0, |p| seen[p] < i)
        });
        let ordered = if caller_order_ok { specs } else { ordered };
        let index: HashMap<String, usize> =
            ordered.iter().enumerate().map(|(i, s)| (s.name.clone(), i)).collect();
        let parents = ordered.iter().map(|s| s.parent.as_ref().map(|p| index[p])).collect();
        Ok(Self { joints: ordered, parents, index })
    }

    /// The 18-joint humanoid used throughout the crate: the 14 editable joints
    /// of the MEO vocabulary plus spine, neck and both clavicles.
    pub fn humanoid() -> Self {
        let j = JointSpec::new;
        Self::new(vec![
            j("waist", None, [0.0, 0.0, 0.0]),
            j("spine", Some("waist"), [0.0, 0.25, 0.0]),
            j("neck", Some("spine"), [0.0, 0.25, 0.0]),
            j("head", Some("neck"), [0.0, 0.12, 0.0]),
            j("right_clavicle", Some("spine"), [-0.08, 0.22, 0.0]),
            j("right_shoulder", Some("right_clavicle"), [-0.10, 0.0, 0.0]),
            j("right_elbow", Some("right_shoulder"), [0.0, -0.28, -0.02]),
            j("right_hand", Some("right_elbow"), [0.0, -0.25, 0.04]),
            j("left_clavicle", Some("spine"), [0.08, 0.22, 0.0]),
            j("left_shoulder", Some("left_clavicle"), [0.10, 0.0, 0.0]),
            j("left_elbow", Some("left_shoulder"), [0.0, -0.28, -0.02]),
            j("left_hand", Some("left_elbow"), [0.0, -0.25, 0.04]),
            j("right_hip", Some("waist"), [-0.09, -0.05, 0.0]),
            j("right_knee", Some("right_hip"), [0.0, -0.42, 0.03]),
            j("right_foot", Some("right_knee"), [0.0, -0.41, -0.03]),
            j("left_hip", Some("waist"), [0.09, -0.05, 0.0]),
            j("left_knee", Some("left_hip"), [0.0, -0.42, 0.03]),
            j("left_foot", Some("left_knee"), [0.0, -0.41, -0.03]),
        ])
        .expect("built-in humanoid is valid")
    }

    /// Root height that puts the humanoid's ankles 8 cm above the floor.
    pub const HUMANOID_STANDING_HEIGHT: f64 = 0.96;

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn joint(&self, index: usize) -> &JointSpec {
        &self.joints[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn parent(&self, index: usize) -> Option<usize> {
        self.parents[index]
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn children(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.parents
            .iter()
            .enumerate()
            .filter(move |(_, p)| **p == Some(index))
            .map(|(i, _)| i)
    }

    /// Indices from the root down to `index`, inclusive.
    pub fn ancestry(&self, index: usize) -> Vec<usize> {
        let mut chain = vec![index];
        let mut cur = index;
        while let Some(p) = self.parents[cur] {
            chain.push(p);
            cur = p;
        }
        chain.reverse();
        chain
    }

    /// True when `ancestor` lies on the path from the root to `index` (inclusive).
    pub fn is_ancestor(&self, ancestor: usize, index: usize) -> bool {
        let mut cur = Some(index);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.parents[c];
        }
        false
    }
}
