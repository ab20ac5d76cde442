//! Session state and the operations behind the HTTP API and the REPL.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use meo_core::lang::print_meo;
use meo_core::motion::{clip_from_json, clip_to_json, forward_kinematics, save_clip};
use meo_core::MotionClip;
use meo_inducer::{induce, AgentBackend, EditPrompt, FixtureMap, InduceError, InducerConfig, Induction, NodeKind,
    RecordingBackend, ReplayBackend, SessionHistory};
use meo_infill::{Engine, EngineConfig, EngineReport, InfillError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::store::{EventLog, SessionEvent, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Source,
    Edited,
    Spline,
}

impl std::str::FromStr for Which {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "source" => Ok(Self::Source),
            "edited" => Ok(Self::Edited),
            "spline" => Ok(Self::Spline),
            _ => Err(format!("unknown clip `{s}` (expected source, edited or spline)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no session `{0}`")]
    NotFound(String),
    #[error("invalid clip: {0}")]
    InvalidClip(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("induction failed: {0}")]
    Induction(#[from] InduceError),
    #[error("execution failed: {error}")]
    Execution { error: InfillError, program: String },
    #[error("{0}")]
    Conflict(String),
    #[error("no edit yet")]
    NoEdit,
    #[error("storage: {0}")]
    Storage(#[from] StoreError),
    #[error("replay diverged: {0}")]
    Replay(String),
}

struct TurnState {
    before: MotionClip,
    spline: MotionClip,
    report: EngineReport,
}

pub struct EditSession {
    pub id: String,
    pub source: MotionClip,
    pub current_clip: MotionClip,
    pub source_description: String,
    pub history: SessionHistory,
    pub engine_config: EngineConfig,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    turns: Vec<TurnState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub source_description: String,
    pub engine_config: EngineConfig,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub history_len: usize,
    pub frames: usize,
    pub fps: u32,
}

impl EditSession {
    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            source_description: self.source_description.clone(),
            engine_config: self.engine_config.clone(),
            created_at: self.created_at,
            updated_at: self.updated_at,
            history_len: self.history.len(),
            frames: self.current_clip.len(),
            fps: self.current_clip.fps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub node: NodeKind,
    pub output: serde_json::Value,
    pub justification: String,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRefs {
    pub source: String,
    pub edited: String,
    pub spline: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditResponse {
    pub session_id: String,
    pub program: meo_core::MeoProgram,
    pub program_text: String,
    pub decomposition: meo_inducer::PromptDecomposition,
    pub report: EngineReport,
    pub node_trace: Vec<NodeSummary>,
    pub clips: ClipRefs,
    pub history_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub instruction: String,
    pub program_text: String,
    pub turn: meo_inducer::Turn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub session_id: String,
    pub edits_replayed: usize,
    pub current_sha256: String,
    pub replayed_sha256: String,
    pub identical: bool,
}

pub fn clip_digest(clip: &MotionClip) -> String {
    hex::encode(Sha256::digest(save_clip(clip)))
}

/// Backend used when no endpoint or fixtures were configured.
pub struct UnconfiguredBackend(pub String);

impl AgentBackend for UnconfiguredBackend {
    fn complete(
        &self,
        _: &[meo_inducer::Message],
        _: f64,
        _: std::time::Duration,
    ) -> Result<String, meo_inducer::BackendError> {
        Err(meo_inducer::BackendError::NotConfigured(self.0.clone()))
    }
}

type Shared = Arc<Mutex<EditSession>>;

pub struct SessionService {
    log: EventLog,
    backend: Arc<dyn AgentBackend>,
    engine: Engine,
    pub inducer: InducerConfig,
    pub default_engine: EngineConfig,
    sessions: Mutex<HashMap<String, Shared>>,
}

struct Executed {
    clip: MotionClip,
    spline: MotionClip,
    report: EngineReport,
}

impl SessionService {
    pub fn new(log: EventLog, backend: Arc<dyn AgentBackend>, engine: Engine) -> Self {
        Self {
            log,
            backend,
            engine,
            inducer: InducerConfig::default(),
            default_engine: EngineConfig::default(),
            sessions: Mutex::default(),
        }
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    fn execute(&self, clip: &MotionClip, induction: &Induction, cfg: &EngineConfig) -> Result<Executed, ServiceError> {
        let out = self.engine.execute_program(clip, &induction.program, cfg).map_err(|error| ServiceError::Execution {
            error,
            program: print_meo(&induction.program),
        })?;
        Ok(Executed { clip: out.clip, spline: out.spline, report: out.report })
    }

    pub fn create_session(
        &self,
        clip: serde_json::Value,
        source_description: String,
        engine_config: Option<EngineConfig>,
    ) -> Result<SessionSummary, ServiceError> {
        let parsed = clip_from_json(clip).map_err(|e| ServiceError::InvalidClip(e.to_string()))?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let engine_config = engine_config.unwrap_or_else(|| self.default_engine.clone());
        let now = Utc::now();
        self.log.append(
            &id,
            &SessionEvent::Created {
                id: id.clone(),
                at: now,
                source_description: source_description.clone(),
                engine_config: engine_config.clone(),
                clip: clip_to_json(&parsed),
            },
        )?;
        let s = EditSession {
            id: id.clone(),
            source: parsed.clone(),
            current_clip: parsed,
            source_description,
            history: SessionHistory::default(),
            engine_config,
            created_at: now,
            updated_at: now,
            turns: Vec::new(),
        };
        let summary = s.summary();
        self.sessions.lock().unwrap().insert(id, Arc::new(Mutex::new(s)));
        Ok(summary)
    }

    /// In memory, or rebuilt from its log.
    fn session(&self, id: &str) -> Result<Shared, ServiceError> {
        if let Some(s) = self.sessions.lock().unwrap().get(id) {
            return Ok(s.clone());
        }
        if !self.log.exists(id) {
            return Err(ServiceError::NotFound(id.into()));
        }
        let s = Arc::new(Mutex::new(self.restore(id)?));
        Ok(self.sessions.lock().unwrap().entry(id.to_string()).or_insert(s).clone())
    }

    /// Folds a session's log, re-executing stored programs.
    fn restore(&self, id: &str) -> Result<EditSession, ServiceError> {
        self.fold(id, |_, _, induction, _| Ok(induction.clone()))
    }

    fn fold(
        &self,
        id: &str,
        mut reinduce: impl FnMut(&EditSession, &str, &Induction, &FixtureMap) -> Result<Induction, ServiceError>,
    ) -> Result<EditSession, ServiceError> {
        let events = self.log.read(id)?;
        let mut it = events.into_iter();
        let Some(SessionEvent::Created { id, at, source_description, engine_config, clip }) = it.next() else {
            return Err(ServiceError::Replay("log does not start with a creation event".into()));
        };
        let clip = clip_from_json(clip).map_err(|e| ServiceError::Replay(e.to_string()))?;
        let mut s = EditSession {
            id,
            source: clip.clone(),
            current_clip: clip,
            source_description,
            history: SessionHistory::default(),
            engine_config,
            created_at: at,
            updated_at: at,
            turns: Vec::new(),
        };
        for ev in it {
            match ev {
                SessionEvent::Created { .. } => return Err(ServiceError::Replay("duplicate creation event".into())),
                SessionEvent::Edited { at, instruction, induction, exchanges, clip_sha256, .. } => {
                    let induction = reinduce(&s, &instruction, &induction, &exchanges)?;
                    let ex = self.execute(&s.current_clip, &induction, &s.engine_config)?;
                    let got = clip_digest(&ex.clip);
                    if got != clip_sha256 {
                        return Err(ServiceError::Replay(format!(
                            "edit {} (`{instruction}`) produced {got}, log has {clip_sha256}",
                            s.history.len() + 1
                        )));
                    }
                    let prompt = EditPrompt::new(instruction, s.source_description.clone());
                    s.history.push(induction.to_turn(&prompt));
                    let before = std::mem::replace(&mut s.current_clip, ex.clip);
                    s.turns.push(TurnState { before, spline: ex.spline, report: ex.report });
                    s.updated_at = at;
                }
                SessionEvent::Undone { at } => {
                    let t = s.turns.pop().ok_or_else(|| ServiceError::Replay("undo with no edit".into()))?;
                    s.history.turns.pop();
                    s.current_clip = t.before;
                    s.updated_at = at;
                }
            }
        }
        Ok(s)
    }

    pub fn summary(&self, id: &str) -> Result<SessionSummary, ServiceError> {
        Ok(self.session(id)?.lock().unwrap().summary())
    }

    pub fn list(&self) -> Result<Vec<String>, ServiceError> {
        Ok(self.log.ids()?)
    }

    /// Induces, executes, logs, then commits; any failure leaves the
    /// session as it was.
    pub fn submit_instruction(&self, id: &str, instruction: &str) -> Result<EditResponse, ServiceError> {
        if instruction.trim().is_empty() {
            return Err(ServiceError::BadRequest("instruction is empty".into()));
        }
        let shared = self.session(id)?;
        let mut s = shared.lock().unwrap();
        let prompt = EditPrompt::new(instruction, s.source_description.clone());
        let recorder = RecordingBackend::new(self.backend.clone());
        let induction = induce(&prompt, &s.history, &recorder, &self.inducer, Some(&s.current_clip))?;
        let ex = self.execute(&s.current_clip, &induction, &s.engine_config)?;
        let now = Utc::now();
        self.log.append(
            id,
            &SessionEvent::Edited {
                at: now,
                instruction: instruction.to_string(),
                induction: induction.clone(),
                exchanges: recorder.recorded(),
                report: ex.report.clone(),
                clip_sha256: clip_digest(&ex.clip),
            },
        )?;
        s.history.push(induction.to_turn(&prompt));
        let before = std::mem::replace(&mut s.current_clip, ex.clip);
        s.turns.push(TurnState { before, spline: ex.spline, report: ex.report.clone() });
        s.updated_at = now;
        Ok(EditResponse {
            session_id: id.to_string(),
            program_text: print_meo(&induction.program),
            program: induction.program,
            decomposition: induction.decomposition,
            report: ex.report,
            node_trace: induction
                .node_trace
                .into_iter()
                .map(|n| NodeSummary {
                    node: n.node,
                    output: n.structured_output,
                    justification: n.justification,
                    attempts: n.attempts,
                })
                .collect(),
            clips: ClipRefs {
                source: format!("/sessions/{id}/clip?which=source"),
                edited: format!("/sessions/{id}/clip?which=edited"),
                spline: format!("/sessions/{id}/clip?which=spline"),
            },
            history_len: s.history.len(),
        })
    }

    pub fn clip(&self, id: &str, which: Which) -> Result<MotionClip, ServiceError> {
        let shared = self.session(id)?;
        let s = shared.lock().unwrap();
        match which {
            Which::Source => Ok(s.source.clone()),
            Which::Edited => Ok(s.current_clip.clone()),
            Which::Spline => s.turns.last().map(|t| t.spline.clone()).ok_or(ServiceError::NoEdit),
        }
    }

    pub fn last_report(&self, id: &str) -> Result<EngineReport, ServiceError> {
        let shared = self.session(id)?;
        let s = shared.lock().unwrap();
        s.turns.last().map(|t| t.report.clone()).ok_or(ServiceError::NoEdit)
    }

    pub fn undo(&self, id: &str) -> Result<SessionSummary, ServiceError> {
        let shared = self.session(id)?;
        let mut s = shared.lock().unwrap();
        if s.turns.is_empty() {
            return Err(ServiceError::Conflict("nothing to undo".into()));
        }
        let now = Utc::now();
        self.log.append(id, &SessionEvent::Undone { at: now })?;
        let t = s.turns.pop().expect("checked above");
        s.history.turns.pop();
        s.current_clip = t.before;
        s.updated_at = now;
        Ok(s.summary())
    }

    pub fn history(&self, id: &str) -> Result<Vec<HistoryEntry>, ServiceError> {
        let shared = self.session(id)?;
        let s = shared.lock().unwrap();
        Ok(s.history
            .turns
            .iter()
            .map(|t| HistoryEntry {
                instruction: t.prompt.instruction.clone(),
                program_text: print_meo(&t.program),
                turn: t.clone(),
            })
            .collect())
    }

    pub fn delete(&self, id: &str) -> Result<(), ServiceError> {
        let shared = self.session(id)?;
        let _guard = shared.lock().unwrap();
        self.log.remove(id)?;
        self.sessions.lock().unwrap().remove(id);
        Ok(())
    }

    /// World joint positions of one frame, for cross-checking client FK.
    pub fn fk(&self, id: &str, which: Which, frame: usize) -> Result<BTreeMap<String, [f64; 3]>, ServiceError> {
        let clip = self.clip(id, which)?;
        let pos = forward_kinematics(&clip, frame).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        Ok(pos.into_iter().map(|(k, v)| (k, [v.x, v.y, v.z])).collect())
    }

    /// Rebuilds the session from its log, re-inducing every edit against a
    /// replay backend built from the logged exchanges, and compares the
    /// result with the live session bitwise.
    pub fn replay_check(&self, id: &str) -> Result<ReplayReport, ServiceError> {
        let current = self.clip(id, Which::Edited)?;
        let cfg = self.inducer.clone();
        let replayed = self.fold(id, |s, instruction, logged, exchanges| {
            let backend = ReplayBackend::new(exchanges.clone());
            let prompt = EditPrompt::new(instruction, s.source_description.clone());
            let got = induce(&prompt, &s.history, &backend, &cfg, Some(&s.current_clip))?;
            if got != *logged {
                return Err(ServiceError::Replay(format!("re-induction of edit {} differs from the log", s.history.len() + 1)));
            }
            Ok(got)
        })?;
        let (a, b) = (clip_digest(&current), clip_digest(&replayed.current_clip));
        Ok(ReplayReport {
            session_id: id.to_string(),
            edits_replayed: replayed.history.len(),
            identical: current.bitwise_eq(&replayed.current_clip),
            current_sha256: a,
            replayed_sha256: b,
        })
    }
}
