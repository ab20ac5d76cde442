//! The five prompt nodes: their inputs, message construction, and strict
//! parsing of replies.

use std::fmt;
use std::sync::OnceLock;

use meo_core::lang::{spatial_names, temporal_names, ExplicitFrame, Extremum, FrameRef, JointConstraint, RotationVerb,
    TranslationDir, Vocabulary};
use meo_core::Joint;
use serde::{Deserialize, Serialize};

use crate::backend::Message;
use crate::prompt::{SessionHistory, SubGoal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Root,
    TimeParser,
    TemporalLookup,
    JointParser,
    SpatialLookup,
}

impl NodeKind {
    pub const ALL: [NodeKind; 5] =
        [Self::Root, Self::TimeParser, Self::TemporalLookup, Self::JointParser, Self::SpatialLookup];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Root => "root",
            Self::TimeParser => "time_parser",
            Self::TemporalLookup => "temporal_lookup",
            Self::JointParser => "joint_parser",
            Self::SpatialLookup => "spatial_lookup",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeLabel {
    #[serde(rename = "global")]
    Global,
    #[serde(rename = "specific moment")]
    SpecificMoment,
}

impl TimeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Global => "global",
            Self::SpecificMoment => "specific moment",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum NodeInput {
    Root { text: String },
    TimeParser { e_f: Option<String> },
    TemporalLookup { e_f: Option<String>, label: TimeLabel },
    JointParser { e_goal: String },
    SpatialLookup { joint: Joint, sub_goal: String },
}

const NO_CLAUSE: &str = "(none)";

impl NodeInput {
    pub fn kind(&self) -> NodeKind {
        match self {
            Self::Root { .. } => NodeKind::Root,
            Self::TimeParser { .. } => NodeKind::TimeParser,
            Self::TemporalLookup { .. } => NodeKind::TemporalLookup,
            Self::JointParser { .. } => NodeKind::JointParser,
            Self::SpatialLookup { .. } => NodeKind::SpatialLookup,
        }
    }

    /// The user message for this input.
    pub fn render(&self) -> String {
        match self {
            Self::Root { text } => text.clone(),
            Self::TimeParser { e_f } => e_f.as_deref().unwrap_or(NO_CLAUSE).to_string(),
            Self::TemporalLookup { e_f, label } => {
                format!("E_F: {}\nType: {}", e_f.as_deref().unwrap_or(NO_CLAUSE), label.as_str())
            }
            Self::JointParser { e_goal } => e_goal.clone(),
            Self::SpatialLookup { joint, sub_goal } => format!("Joint: {joint}\nSub-Goal: {sub_goal}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootOutput {
    pub e_ctx: String,
    pub e_goal: String,
    pub e_f: Option<String>,
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeOutput {
    pub label: TimeLabel,
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LookupOutput {
    pub name: String,
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointPick {
    pub joint: String,
    pub sub_goal: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointOutput {
    pub joints: Vec<JointPick>,
}

/// A reply that parsed and passed the node's own checks.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeOutput {
    Root(RootOutput),
    Time(TimeOutput),
    Temporal { name: String, frame: FrameRef, justification: String },
    Joints(Vec<SubGoal>),
    Spatial { name: String, constraint: JointConstraint, justification: String },
}

impl NodeOutput {
    /// Normalized record for traces.
    pub fn structured(&self) -> serde_json::Value {
        match self {
            Self::Root(r) => serde_json::to_value(r).unwrap(),
            Self::Time(t) => serde_json::to_value(t).unwrap(),
            Self::Temporal { name, justification, .. } | Self::Spatial { name, justification, .. } => {
                serde_json::json!({ "name": name, "justification": justification })
            }
            Self::Joints(js) => serde_json::json!({ "joints": js }),
        }
    }

    pub fn justification(&self) -> String {
        match self {
            Self::Root(r) => r.justification.clone(),
            Self::Time(t) => t.justification.clone(),
            Self::Temporal { justification, .. } | Self::Spatial { justification, .. } => justification.clone(),
            Self::Joints(js) => js.iter().map(|j| j.e_j.as_str()).collect::<Vec<_>>().join(" "),
        }
    }
}

fn words<T: Vocabulary>() -> String {
    T::options()
}

fn preamble(node: NodeKind) -> String {
    match node {
        NodeKind::Root => "You are the root node of a motion-editing instruction parser.\n\
Split the prompt E into e_ctx, a description of the source motion; e_goal, what the edit must achieve; and e_f, \
the clause saying when the edit applies, or null when there is none. Make e_goal self-contained: name the body side \
and the action it refers to. Earlier instructions of this session and your replies to them come before the current \
prompt; resolve short corrections such as \"higher\" against them. Justify your split.\n\
Reply with exactly one JSON object: {\"e_ctx\": string, \"e_goal\": string, \"e_f\": string or null, \"justification\": string}"
            .to_string(),
        NodeKind::TimeParser => "You are the time parser of a motion-editing instruction parser.\n\
Decide whether the time clause E_F refers to the global motion (the whole clip, or its start, middle or end) or to a \
specific moment or action within it. A missing clause, written (none), is global. Justify your choice.\n\
Reply with exactly one JSON object: {\"label\": \"global\" or \"specific moment\", \"justification\": string}"
            .to_string(),
        NodeKind::TemporalLookup => {
            let names: Vec<String> = temporal_names().into_keys().collect();
            format!(
                "You are the temporal look-up of a motion-editing instruction parser.\n\
Pick the frame name that best matches E_F. For type global pick one of: {}. For type specific moment pick \
<relation>_<joint>_<extremum>, where relation is when (at that instant), before or after; joint is one of: {}; \
extremum is one of: {} (furthest and closest are measured horizontally from the waist). Justify your choice.\n\
Valid names: {}\n\
Reply with exactly one JSON object: {{\"name\": string, \"justification\": string}}",
                words::<ExplicitFrame>(),
                words::<Joint>(),
                words::<Extremum>(),
                names.join(", ")
            )
        }
        NodeKind::JointParser => format!(
            "You are the joint parser of a motion-editing instruction parser.\n\
Decide the primary joint or joints that must change to accomplish the goal, and state the sub-goal each must \
accomplish as a short justification. Joints: {}.\n\
Reply with exactly one JSON object: {{\"joints\": [{{\"joint\": string, \"sub_goal\": string}}]}}",
            words::<Joint>()
        ),
        NodeKind::SpatialLookup => format!(
            "You are the spatial look-up of a motion-editing instruction parser.\n\
Pick the constraint name that best fulfils the joint's sub-goal. Names have the forms move_<joint>_<direction>, \
move_<joint>_<direction>_of_<other joint> and <verb>_<joint>, and must use the given joint. Directions: {} (in and \
out are towards and away from the body midline, for left or right joints only). Verbs: {}. \
Justify your choice.\n\
Reply with exactly one JSON object: {{\"name\": string, \"justification\": string}}",
            words::<TranslationDir>(),
            words::<RotationVerb>()
        ),
    }
}

#[derive(Debug, Clone, Deserialize)]
struct Demo {
    input: String,
    output: serde_json::Value,
}

fn demo_source(node: NodeKind) -> &'static str {
    match node {
        NodeKind::Root => include_str!("../demos/root.json"),
        NodeKind::TimeParser => include_str!("../demos/time_parser.json"),
        NodeKind::TemporalLookup => include_str!("../demos/temporal_lookup.json"),
        NodeKind::JointParser => include_str!("../demos/joint_parser.json"),
        NodeKind::SpatialLookup => include_str!("../demos/spatial_lookup.json"),
    }
}

/// In-context demonstrations as (user, assistant) pairs.
pub fn demonstrations(node: NodeKind) -> &'static [(String, String)] {
    static CACHE: OnceLock<Vec<Vec<(String, String)>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        NodeKind::ALL
            .iter()
            .map(|&n| {
                let demos: Vec<Demo> = serde_json::from_str(demo_source(n)).expect("demonstration file is valid JSON");
                demos.into_iter().map(|d| (d.input, render_reply(&d.output))).collect()
            })
            .collect()
    });
    &all[NodeKind::ALL.iter().position(|n| *n == node).unwrap()]
}

/// Canonical text of a JSON reply: compact, keys sorted.
pub fn render_reply(v: &serde_json::Value) -> String {
    serde_json::to_string(v).expect("value serializes")
}

/// System preamble, demonstrations, prior turns (root only), then the input.
pub fn build_messages(input: &NodeInput, history: &SessionHistory) -> Vec<Message> {
    let node = input.kind();
    let mut out = vec![Message::system(preamble(node))];
    for (u, a) in demonstrations(node) {
        out.push(Message::user(u.clone()));
        out.push(Message::assistant(a.clone()));
    }
    if node == NodeKind::Root {
        for turn in &history.turns {
            out.push(Message::user(turn.prompt.root_text()));
            if let Some(r) = turn.raw_agent_responses.first() {
                out.push(Message::assistant(r.clone()));
            }
        }
    }
    out.push(Message::user(input.render()));
    out
}

/// The JSON object in a reply, tolerating a surrounding code fence.
fn json_body(raw: &str) -> &str {
    let t = raw.trim();
    let t = t.strip_prefix("```json").or_else(|| t.strip_prefix("```")).unwrap_or(t);
    t.strip_suffix("```").unwrap_or(t).trim()
}

fn nonempty(field: &str, v: &str) -> Result<(), String> {
    if v.trim().is_empty() {
        Err(format!("`{field}` must not be empty"))
    } else {
        Ok(())
    }
}

/// Parses and checks a reply against the node's schema and vocabulary. The
/// error text is what the agent is shown before retrying.
pub fn parse_output(input: &NodeInput, raw: &str) -> Result<NodeOutput, String> {
    let body = json_body(raw);
    let bad_json = |e: serde_json::Error| format!("reply is not the required JSON object ({e})");
    match input {
        NodeInput::Root { .. } => {
            let mut r: RootOutput = serde_json::from_str(body).map_err(bad_json)?;
            nonempty("e_goal", &r.e_goal)?;
            if r.e_f.as_deref().is_some_and(|s| s.trim().is_empty()) {
                r.e_f = None;
            }
            Ok(NodeOutput::Root(r))
        }
        NodeInput::TimeParser { .. } => Ok(NodeOutput::Time(serde_json::from_str(body).map_err(bad_json)?)),
        NodeInput::TemporalLookup { label, .. } => {
            let r: LookupOutput = serde_json::from_str(body).map_err(bad_json)?;
            let frame = temporal_names()
                .remove(&r.name)
                .ok_or_else(|| format!("`{}` is not a valid frame name", r.name))?;
            let explicit = matches!(frame, FrameRef::Explicit { .. });
            match (label, explicit) {
                (TimeLabel::Global, false) => {
                    return Err(format!("`{}` names a specific moment but the type is global", r.name))
                }
                (TimeLabel::SpecificMoment, true) => {
                    return Err(format!("`{}` is a global frame but the type is specific moment", r.name))
                }
                _ => {}
            }
            Ok(NodeOutput::Temporal { name: r.name, frame, justification: r.justification })
        }
        NodeInput::JointParser { .. } => {
            let r: JointOutput = serde_json::from_str(body).map_err(bad_json)?;
            if r.joints.is_empty() {
                return Err("`joints` must name at least one joint".into());
            }
            let mut out: Vec<SubGoal> = Vec::new();
            for p in r.joints {
                let joint = Joint::parse_word(&p.joint)
                    .ok_or_else(|| format!("`{}` is not a joint; choose from {}", p.joint, words::<Joint>()))?;
                if out.iter().any(|s| s.joint == joint) {
                    return Err(format!("joint `{joint}` is listed twice"));
                }
                nonempty("sub_goal", &p.sub_goal)?;
                out.push(SubGoal { joint, e_j: p.sub_goal });
            }
            Ok(NodeOutput::Joints(out))
        }
        NodeInput::SpatialLookup { joint, .. } => {
            let r: LookupOutput = serde_json::from_str(body).map_err(bad_json)?;
            let constraint = spatial_names()
                .remove(&r.name)
                .ok_or_else(|| format!("`{}` is not a valid constraint name", r.name))?;
            if constraint.joint != *joint {
                return Err(format!("`{}` constrains `{}`, not `{joint}`", r.name, constraint.joint));
            }
            Ok(NodeOutput::Spatial { name: r.name, constraint, justification: r.justification })
        }
    }
}
