//! Editing sessions over HTTP: each session holds a source clip, the
//! conversation so far and the current edited clip, persisted as an
//! append-only event log that can be replayed bit for bit.

pub mod api;
pub mod service;
pub mod store;
pub mod suite;

pub use api::{router, AppState};
pub use service::{
    clip_digest, EditResponse, EditSession, HistoryEntry, ReplayReport, ServiceError, SessionService, SessionSummary,
    UnconfiguredBackend, Which,
};
pub use store::{EventLog, SessionEvent, StoreError};
