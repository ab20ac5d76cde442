//! Natural-language instruction to MEO program.
//!
//! Induction walks a fixed tree of prompts: the root splits the prompt into
//! context, goal and time; the time parser and temporal look-up pick a
//! frame name; the joint parser picks joints and sub-goals; the spatial
//! look-up picks one constraint name per joint. Every reply is checked
//! against the closed operator catalog and retried with the error attached.

pub mod backend;
pub mod fixtures;
pub mod induce;
pub mod nodes;
pub mod prompt;

pub use backend::{AgentBackend, BackendError, FixtureMap, HttpBackend, Message, RecordingBackend, ReplayBackend, Role,
    ScriptedBackend};
pub use induce::{induce, run_node, InduceError, InducerConfig, Induction, NodeResult};
pub use nodes::{build_messages, NodeInput, NodeKind, TimeLabel};
pub use prompt::{EditPrompt, PromptDecomposition, SessionHistory, SubGoal, Turn};
