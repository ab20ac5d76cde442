use std::time::Duration;

use meo_core::keyframe::{resolve_frame, EditConfig};
use meo_core::lang::{validate_meo, validate_program_shape, Diagnostic, FrameRef};
use meo_core::{Meo, MeoProgram, MotionClip};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{AgentBackend, BackendError, Message};
use crate::nodes::{build_messages, parse_output, NodeInput, NodeKind, NodeOutput, TimeLabel};
use crate::prompt::{EditPrompt, PromptDecomposition, SessionHistory, Turn};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InducerConfig {
    /// Backend calls allowed per node, including the first.
    pub max_retries: usize,
    pub temperature: f64,
    #[serde(with = "secs")]
    pub timeout: Duration,
    /// Used to check that chosen frames resolve on the session's clip.
    pub edit: EditConfig,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl Default for InducerConfig {
    fn default() -> Self {
        Self { max_retries: 3, temperature: 0.0, timeout: Duration::from_secs(60), edit: EditConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeResult {
    pub node: NodeKind,
    pub structured_output: serde_json::Value,
    pub justification: String,
    pub attempts: usize,
    /// The accepted reply, verbatim.
    pub raw_response: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Induction {
    pub program: MeoProgram,
    pub decomposition: PromptDecomposition,
    pub node_trace: Vec<NodeResult>,
}

impl Induction {
    pub fn to_turn(&self, prompt: &EditPrompt) -> Turn {
        Turn {
            prompt: prompt.clone(),
            decomposition: self.decomposition.clone(),
            program: self.program.clone(),
            raw_agent_responses: self.node_trace.iter().map(|n| n.raw_response.clone()).collect(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InduceError {
    #[error("instruction is empty")]
    EmptyInstruction,
    #[error("{node}: {source}")]
    Backend { node: NodeKind, source: BackendError },
    #[error("{node} gave no valid reply in {attempts} attempts; last error: {last_error}")]
    Node { node: NodeKind, attempts: usize, last_error: String, transcript: Vec<String> },
    #[error("induced program is not executable: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

impl InduceError {
    /// Every raw reply received by the failing node.
    pub fn transcript(&self) -> &[String] {
        match self {
            Self::Node { transcript, .. } => transcript,
            _ => &[],
        }
    }
}

/// Extra clip-dependent acceptance test for a parsed reply.
pub type Check<'a> = dyn Fn(&NodeOutput) -> Result<(), String> + 'a;

/// Queries the backend until a reply parses and passes `check`, feeding each
/// rejection back to the agent. At most `max_retries` calls.
pub fn run_node(
    input: &NodeInput,
    history: &SessionHistory,
    backend: &dyn AgentBackend,
    config: &InducerConfig,
    check: &Check<'_>,
) -> Result<(NodeResult, NodeOutput), InduceError> {
    let node = input.kind();
    let mut messages = build_messages(input, history);
    let mut transcript = Vec::new();
    let mut last_error = String::from("no attempts allowed");
    for attempt in 1..=config.max_retries {
        let raw = backend
            .complete(&messages, config.temperature, config.timeout)
            .map_err(|source| InduceError::Backend { node, source })?;
        transcript.push(raw.clone());
        match parse_output(input, &raw).and_then(|o| check(&o).map(|_| o)) {
            Ok(out) => {
                let result = NodeResult {
                    node,
                    structured_output: out.structured(),
                    justification: out.justification(),
                    attempts: attempt,
                    raw_response: raw,
                };
                return Ok((result, out));
            }
            Err(e) => {
                messages.push(Message::assistant(raw));
                messages.push(Message::user(format!("Your reply was invalid: {e}. Reply again with one corrected JSON object.")));
                last_error = e;
            }
        }
    }
    Err(InduceError::Node { node, attempts: config.max_retries, last_error, transcript })
}

fn accept_all(_: &NodeOutput) -> Result<(), String> {
    Ok(())
}

/// Runs Root, TimeParser, TemporalLookup, JointParser, then SpatialLookup
/// once per joint. With `clip`, look-up answers that cannot be executed on
/// it are rejected and retried.
pub fn induce(
    prompt: &EditPrompt,
    history: &SessionHistory,
    backend: &dyn AgentBackend,
    config: &InducerConfig,
    clip: Option<&MotionClip>,
) -> Result<Induction, InduceError> {
    if prompt.instruction.trim().is_empty() {
        return Err(InduceError::EmptyInstruction);
    }
    let mut trace = Vec::new();

    let (r, out) = run_node(&NodeInput::Root { text: prompt.root_text() }, history, backend, config, &accept_all)?;
    trace.push(r);
    let NodeOutput::Root(root) = out else { unreachable!("root input yields root output") };
    let e_ctx = if root.e_ctx.trim().is_empty() { prompt.source_description.clone() } else { root.e_ctx.clone() };

    let none = SessionHistory::default();
    let (r, out) = run_node(&NodeInput::TimeParser { e_f: root.e_f.clone() }, &none, backend, config, &accept_all)?;
    trace.push(r);
    let NodeOutput::Time(time) = out else { unreachable!() };
    let label: TimeLabel = time.label;

    let frame_check = |o: &NodeOutput| -> Result<(), String> {
        match (o, clip) {
            (NodeOutput::Temporal { name, frame, .. }, Some(c)) => {
                resolve_frame(c, frame, &config.edit).map(|_| ()).map_err(|e| format!("`{name}` cannot be used on this motion: {e}"))
            }
            _ => Ok(()),
        }
    };
    let input = NodeInput::TemporalLookup { e_f: root.e_f.clone(), label };
    let (r, out) = run_node(&input, &none, backend, config, &frame_check)?;
    trace.push(r);
    let NodeOutput::Temporal { frame, .. } = out else { unreachable!() };

    let (r, out) = run_node(&NodeInput::JointParser { e_goal: root.e_goal.clone() }, &none, backend, config, &accept_all)?;
    trace.push(r);
    let NodeOutput::Joints(subgoals) = out else { unreachable!() };

    let mut ops = Vec::new();
    for sg in &subgoals {
        let frame: FrameRef = frame.clone();
        let meo_check = |o: &NodeOutput| -> Result<(), String> {
            let NodeOutput::Spatial { name, constraint, .. } = o else { return Ok(()) };
            let p = MeoProgram::new(vec![Meo::new(constraint.clone(), frame.clone())]);
            let mut diags = validate_program_shape(&p);
            if let Some(c) = clip {
                diags.extend(validate_meo(&p, c));
            }
            match diags.first() {
                Some(d) => Err(format!("`{name}` is not executable: {}", d.message)),
                None => Ok(()),
            }
        };
        let input = NodeInput::SpatialLookup { joint: sg.joint, sub_goal: sg.e_j.clone() };
        let (r, out) = run_node(&input, &none, backend, config, &meo_check)?;
        trace.push(r);
        let NodeOutput::Spatial { constraint, .. } = out else { unreachable!() };
        ops.push(Meo::new(constraint, frame));
    }

    let program = MeoProgram::new(ops);
    let mut diags = validate_program_shape(&program);
    if let Some(c) = clip {
        diags.extend(validate_meo(&program, c));
    }
    if !diags.is_empty() {
        return Err(InduceError::Invalid(diags));
    }
    let decomposition = PromptDecomposition { e_ctx, e_goal: root.e_goal, e_f: root.e_f, subgoals };
    Ok(Induction { program, decomposition, node_trace: trace })
}

#[cfg(test)]
mod tests {
    use meo_core::lang::print_meo;

    use super::*;
    use crate::backend::ScriptedBackend;

    fn worked_replies() -> Vec<&'static str> {
        vec![
            r#"{"e_ctx":"The character does a squat","e_goal":"Jump into the air","e_f":"At the bottom of the squat","justification":"j"}"#,
            r#"{"label":"specific moment","justification":"j"}"#,
            r#"{"name":"when_waist_lowest","justification":"j"}"#,
            r#"{"joints":[{"joint":"waist","sub_goal":"To jump into the air, we need to move the waist up"}]}"#,
            r#"{"name":"move_waist_up","justification":"j"}"#,
        ]
    }

    fn prompt() -> EditPrompt {
        EditPrompt::new("The character does a squat. At the bottom of the squat, jump into the air.", "")
    }

    #[test]
    fn scripted_worked_example() {
        let b = ScriptedBackend::new(worked_replies());
        let out = induce(&prompt(), &SessionHistory::default(), &b, &InducerConfig::default(), None).unwrap();
        assert_eq!(print_meo(&out.program), "translate(waist, up) @ when(waist, lowest, at)");
        let order: Vec<NodeKind> = out.node_trace.iter().map(|n| n.node).collect();
        assert_eq!(order, NodeKind::ALL);
        assert_eq!(out.decomposition.subgoals[0].e_j, "To jump into the air, we need to move the waist up");
        assert_eq!(out.node_trace[3].justification, out.decomposition.subgoals[0].e_j);
    }

    #[test]
    fn garbage_twice_then_valid() {
        let mut replies = vec!["hello", r#"{"e_goal": 3}"#];
        replies.extend(worked_replies());
        let b = ScriptedBackend::new(replies);
        let out = induce(&prompt(), &SessionHistory::default(), &b, &InducerConfig::default(), None).unwrap();
        assert_eq!(out.node_trace[0].attempts, 3);
        let third = &b.calls()[2];
        assert_eq!(third[third.len() - 4].content, "hello");
        assert!(third.last().unwrap().content.starts_with("Your reply was invalid"));
    }

    #[test]
    fn retry_bound_surfaces_transcript() {
        let b = ScriptedBackend::new(["a", "b", "c", "d"]);
        let err = induce(&prompt(), &SessionHistory::default(), &b, &InducerConfig::default(), None).unwrap_err();
        assert_eq!(err.transcript(), ["a", "b", "c"]);
        assert!(matches!(err, InduceError::Node { node: NodeKind::Root, attempts: 3, .. }));
        assert_eq!(b.remaining(), 1);
    }

    #[test]
    fn backend_failure_is_a_transport_error() {
        let b = ScriptedBackend::new(Vec::<String>::new());
        let err = induce(&prompt(), &SessionHistory::default(), &b, &InducerConfig::default(), None).unwrap_err();
        assert!(matches!(err, InduceError::Backend { source: BackendError::ScriptExhausted, .. }));
    }

    #[test]
    fn spatial_lookup_runs_once_per_joint() {
        let mut r = worked_replies();
        r[3] = r#"{"joints":[{"joint":"left_hand","sub_goal":"a"},{"joint":"right_hand","sub_goal":"b"}]}"#;
        r[4] = r#"{"name":"move_left_hand_up","justification":"j"}"#;
        r.push(r#"{"name":"move_right_hand_up","justification":"j"}"#);
        let out = induce(&prompt(), &SessionHistory::default(), &ScriptedBackend::new(r), &InducerConfig::default(), None)
            .unwrap();
        assert_eq!(out.program.len(), 2);
        assert_eq!(out.node_trace.iter().filter(|n| n.node == NodeKind::SpatialLookup).count(), 2);
    }

    #[test]
    fn inapplicable_constraint_is_retried() {
        let mut r = worked_replies();
        r[3] = r#"{"joints":[{"joint":"head","sub_goal":"look"}]}"#;
        r[4] = r#"{"name":"move_head_in","justification":"j"}"#;
        r.push(r#"{"name":"flex_head","justification":"j"}"#);
        let out = induce(&prompt(), &SessionHistory::default(), &ScriptedBackend::new(r), &InducerConfig::default(), None)
            .unwrap();
        assert_eq!(out.node_trace.last().unwrap().attempts, 2);
    }

    #[test]
    fn empty_instruction() {
        let b = ScriptedBackend::new(worked_replies());
        let err = induce(&EditPrompt::new("  ", "x"), &SessionHistory::default(), &b, &InducerConfig::default(), None);
        assert_eq!(err.unwrap_err(), InduceError::EmptyInstruction);
    }
}
