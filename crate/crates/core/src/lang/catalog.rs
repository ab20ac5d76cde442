//! Flattened operator names (`when_waist_lowest`, `move_waist_up`, ...) that
//! the LLM look-up nodes choose from. Names map one-to-one onto AST fragments
//! with no magnitude.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::{ConstraintKind, FrameRef, JointConstraint};
use super::vocab::{ExplicitFrame, Extremum, Joint, RotationVerb, TemporalRelation, TranslationDir, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogEntry {
    Frame(FrameRef),
    Constraint(JointConstraint),
}

fn relation_prefix(r: TemporalRelation) -> &'static str {
    match r {
        TemporalRelation::At => "when",
        TemporalRelation::Before => "before",
        TemporalRelation::After => "after",
    }
}

/// Catalog name of a frame reference; `None` for index frames.
pub fn frame_name(f: &FrameRef) -> Option<String> {
    match f {
        FrameRef::Explicit { frame } => Some(frame.as_str().to_string()),
        FrameRef::Implicit { relation, anchor, extremum } => {
            Some(format!("{}_{anchor}_{extremum}", relation_prefix(*relation)))
        }
        FrameRef::Index { .. } => None,
    }
}

/// Catalog name of a constraint; magnitudes are ignored.
pub fn constraint_name(c: &JointConstraint) -> String {
    match &c.kind {
        ConstraintKind::Rotate { verb, .. } => format!("{verb}_{}", c.joint),
        ConstraintKind::Translate { dir, relative_to: None, .. } => format!("move_{}_{dir}", c.joint),
        ConstraintKind::Translate { dir, relative_to: Some(r), .. } => format!("move_{}_{dir}_of_{r}", c.joint),
    }
}

/// All temporal names, sorted.
pub fn temporal_names() -> BTreeMap<String, FrameRef> {
    let mut out = BTreeMap::new();
    for &frame in ExplicitFrame::ALL {
        let f = FrameRef::Explicit { frame };
        out.insert(frame_name(&f).unwrap(), f);
    }
    for &relation in TemporalRelation::ALL {
        for &anchor in Joint::ALL {
            for &extremum in Extremum::ALL {
                let f = FrameRef::Implicit { relation, anchor, extremum };
                out.insert(frame_name(&f).unwrap(), f);
            }
        }
    }
    out
}

/// All spatial names, sorted.
pub fn spatial_names() -> BTreeMap<String, JointConstraint> {
    let mut out = BTreeMap::new();
    for &joint in Joint::ALL {
        for &dir in TranslationDir::ALL {
            let c = JointConstraint::translate(joint, dir, None, None);
            out.insert(constraint_name(&c), c);
            for &rel in Joint::ALL.iter().filter(|r| **r != joint) {
                let c = JointConstraint::translate(joint, dir, Some(rel), None);
                out.insert(constraint_name(&c), c);
            }
        }
        for &verb in RotationVerb::ALL {
            let c = JointConstraint::rotate(joint, verb, None);
            out.insert(constraint_name(&c), c);
        }
    }
    out
}

/// The complete name vocabulary.
pub fn catalog_names() -> BTreeMap<String, CatalogEntry> {
    let mut out: BTreeMap<String, CatalogEntry> =
        temporal_names().into_iter().map(|(k, v)| (k, CatalogEntry::Frame(v))).collect();
    for (k, v) in spatial_names() {
        let clash = out.insert(k.clone(), CatalogEntry::Constraint(v));
        debug_assert!(clash.is_none(), "catalog name `{k}` is ambiguous");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_names() {
        let cat = catalog_names();
        assert_eq!(
            cat["when_waist_lowest"],
            CatalogEntry::Frame(FrameRef::when(Joint::Waist, Extremum::Lowest, TemporalRelation::At))
        );
        assert_eq!(
            cat["move_waist_up"],
            CatalogEntry::Constraint(JointConstraint::translate(Joint::Waist, TranslationDir::Up, None, None))
        );
        assert!(cat.contains_key("move_right_hand_up_of_head"));
        assert!(cat.contains_key("flex_right_knee"));
        assert!(cat.contains_key("entire_motion"));
    }

    #[test]
    fn size_is_the_cross_product() {
        // counted independently from the vocabulary sizes
        let (j, r, t, g, d, e) = (14usize, 4usize, 6usize, 4usize, 3usize, 4usize);
        let temporal = g + d * j * e;
        let spatial = j * t + j * r + j * t * (j - 1);
        assert_eq!(temporal_names().len(), temporal);
        assert_eq!(spatial_names().len(), spatial);
        assert_eq!(catalog_names().len(), temporal + spatial);
    }

    #[test]
    fn bijective_with_fragments() {
        for (name, f) in temporal_names() {
            assert_eq!(frame_name(&f).unwrap(), name);
        }
        for (name, c) in spatial_names() {
            assert_eq!(constraint_name(&c), name);
        }
        let values: Vec<_> = catalog_names().into_values().collect();
        for (i, a) in values.iter().enumerate() {
            for b in &values[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }
}
