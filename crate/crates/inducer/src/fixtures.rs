//! Authoring replay fixtures from scripted sessions.
//!
//! A script lists, per turn, the prompt and the node replies in tree order.
//! Recording runs the real induction against a scripted backend and keeps
//! every exchange keyed by message hash, so replays depend only on the
//! prompt, the history and the shipped demonstrations.

use meo_core::lang::{parse_meo, print_meo};
use meo_core::synth::{MotionFamily, SynthParams};
use meo_core::MotionClip;
use serde::{Deserialize, Serialize};

use crate::backend::{FixtureMap, RecordingBackend, ScriptedBackend};
use crate::induce::{induce, InducerConfig, Induction};
use crate::nodes::render_reply;
use crate::prompt::{EditPrompt, SessionHistory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptedReply {
    Json(serde_json::Map<String, serde_json::Value>),
    Raw(String),
}

impl ScriptedReply {
    pub fn text(&self) -> String {
        match self {
            Self::Json(m) => render_reply(&serde_json::Value::Object(m.clone())),
            Self::Raw(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedTurn {
    pub prompt: EditPrompt,
    pub replies: Vec<ScriptedReply>,
    /// The program the turn must induce, in surface syntax.
    pub expect: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureScript {
    pub name: String,
    /// Synthetic motion family the session runs on.
    pub family: MotionFamily,
    pub turns: Vec<ScriptedTurn>,
}

impl FixtureScript {
    pub fn clip(&self) -> MotionClip {
        SynthParams::canonical(self.family).generate()
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FixtureError {
    #[error("script `{script}` turn {turn}: {message}")]
    Turn { script: String, turn: usize, message: String },
    #[error("scripts disagree on the reply for message hash {0}")]
    Conflict(String),
}

/// Runs the script and returns its fixtures plus each turn's induction.
pub fn record_script(script: &FixtureScript, config: &InducerConfig) -> Result<(FixtureMap, Vec<Induction>), FixtureError> {
    let clip = script.clip();
    let mut history = SessionHistory::default();
    let mut fixtures = FixtureMap::default();
    let mut out = Vec::new();
    for (i, turn) in script.turns.iter().enumerate() {
        let err = |message: String| FixtureError::Turn { script: script.name.clone(), turn: i, message };
        let backend = RecordingBackend::new(ScriptedBackend::new(turn.replies.iter().map(ScriptedReply::text)));
        let induced = induce(&turn.prompt, &history, &backend, config, Some(&clip)).map_err(|e| err(e.to_string()))?;
        if backend.inner.remaining() != 0 {
            return Err(err(format!("{} scripted replies unused", backend.inner.remaining())));
        }
        let expect = parse_meo(&turn.expect).map_err(|e| err(format!("bad expectation: {e}")))?;
        if induced.program != expect {
            return Err(err(format!("induced `{}`, expected `{}`", print_meo(&induced.program), turn.expect)));
        }
        merge(&mut fixtures, backend.recorded())?;
        history.push(induced.to_turn(&turn.prompt));
        out.push(induced);
    }
    Ok((fixtures, out))
}

/// Merges fixture maps, rejecting different replies for the same hash.
pub fn merge(into: &mut FixtureMap, from: FixtureMap) -> Result<(), FixtureError> {
    for (k, v) in from.0 {
        match into.0.get(&k) {
            Some(old) if *old != v => return Err(FixtureError::Conflict(k)),
            _ => {
                into.0.insert(k, v);
            }
        }
    }
    Ok(())
}

/// All scripts, recorded into one map.
pub fn record_all(scripts: &[FixtureScript], config: &InducerConfig) -> Result<FixtureMap, FixtureError> {
    let mut all = FixtureMap::default();
    for s in scripts {
        merge(&mut all, record_script(s, config)?.0)?;
    }
    Ok(all)
}
