use super::ast::{ConstraintKind, FrameRef, JointConstraint, Meo, MeoProgram};

fn constraint(c: &JointConstraint) -> String {
    match &c.kind {
        ConstraintKind::Rotate { verb, magnitude_deg } => match magnitude_deg {
            Some(m) => format!("rotate({}, {verb}, {m}deg)", c.joint),
            None => format!("rotate({}, {verb})", c.joint),
        },
        ConstraintKind::Translate { dir, relative_to, magnitude_m } => {
            let mut s = format!("translate({}, {dir}", c.joint);
            if let Some(r) = relative_to {
                s.push_str(&format!(", {r}"));
            }
            if let Some(m) = magnitude_m {
                s.push_str(&format!(", {m}m"));
            }
            s.push(')');
            s
        }
    }
}

fn frame(f: &FrameRef) -> String {
    match f {
        FrameRef::Explicit { frame } => frame.to_string(),
        FrameRef::Implicit { relation, anchor, extremum } => format!("when({anchor}, {extremum}, {relation})"),
        FrameRef::Index { frame } => format!("frame({frame})"),
    }
}

pub(crate) fn print_one(m: &Meo) -> String {
    format!("{} @ {}", constraint(&m.constraint), frame(&m.frame))
}

/// Canonical surface text; `parse_meo(print_meo(p)) == p`.
pub fn print_meo(program: &MeoProgram) -> String {
    program.ops.iter().map(print_one).collect::<Vec<_>>().join("; ")
}
