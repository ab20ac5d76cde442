use meo_core::{Joint, MeoProgram};
use serde::{Deserialize, Serialize};

/// An edit instruction plus a short description of the source motion.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EditPrompt {
    pub instruction: String,
    #[serde(default)]
    pub source_description: String,
}

impl EditPrompt {
    pub fn new(instruction: impl Into<String>, source_description: impl Into<String>) -> Self {
        Self { instruction: instruction.into(), source_description: source_description.into() }
    }

    /// The text handed to the root node: the description followed by the
    /// instruction, unless the instruction already starts with it.
    pub fn root_text(&self) -> String {
        let i = self.instruction.trim();
        let d = self.source_description.trim();
        if d.is_empty() || i.starts_with(d) {
            i.to_string()
        } else if d.ends_with(['.', '!', '?']) {
            format!("{d} {i}")
        } else {
            format!("{d}. {i}")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubGoal {
    pub joint: Joint,
    pub e_j: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PromptDecomposition {
    pub e_ctx: String,
    pub e_goal: String,
    pub e_f: Option<String>,
    pub subgoals: Vec<SubGoal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub prompt: EditPrompt,
    pub decomposition: PromptDecomposition,
    pub program: MeoProgram,
    /// Accepted raw replies in node order; the first is the root's.
    pub raw_agent_responses: Vec<String>,
}

/// Prior turns of a session, oldest first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SessionHistory {
    pub turns: Vec<Turn>,
}

impl SessionHistory {
    pub fn push(&mut self, turn: Turn) {
        self.turns.push(turn);
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }
}
