//! The MEO language: vocabularies, AST, surface syntax, validation and the
//! flattened operator-name catalog the LLM chooses from.
//!
//! Surface grammar (EBNF):
//!
//! ```text
//! program    = [ meo { ";" meo } [ ";" ] ] ;
//! meo        = constraint "@" frame ;
//! constraint = "rotate" "(" joint "," verb [ "," angle ] ")"
//!            | "translate" "(" joint "," direction [ "," joint ] [ "," length ] ")" ;
//! frame      = explicit | "when" "(" joint "," extremum "," relation ")" | "frame" "(" integer ")" ;
//! angle      = number "deg" ;
//! length     = number "m" ;
//! ```
//!
//! Keywords and vocabulary words are case-insensitive; `#` starts a comment.

mod ast;
mod catalog;
mod parse;
mod print;
pub mod random;
mod validate;
mod vocab;

pub use ast::{ConstraintKind, FrameRef, JointConstraint, Meo, MeoProgram};
pub use catalog::{catalog_names, constraint_name, frame_name, spatial_names, temporal_names, CatalogEntry};
pub use parse::{parse_meo, ParseError};
pub use print::print_meo;
pub use validate::{validate_meo, validate_program_shape, Diagnostic, DiagnosticKind};
pub use vocab::{ExplicitFrame, Extremum, Joint, RotationVerb, Side, TemporalRelation, TranslationDir, Vocabulary};
