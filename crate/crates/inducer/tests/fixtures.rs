//! Replay fixtures: the committed map must equal a fresh recording of the
//! committed scripts, and replaying it must reproduce each scripted turn.

use std::path::PathBuf;

use meo_core::lang::print_meo;
use meo_inducer::fixtures::{record_all, record_script, FixtureScript};
use meo_inducer::{induce, BackendError, EditPrompt, FixtureMap, InduceError, InducerConfig, NodeKind, ReplayBackend,
    SessionHistory};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn scripts() -> Vec<FixtureScript> {
    let mut paths: Vec<_> = std::fs::read_dir(dir().join("scripts")).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths.iter().map(|p| serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()).collect()
}

fn replay() -> ReplayBackend {
    ReplayBackend::load(&dir().join("replay.json")).unwrap()
}

/// Set MEO_UPDATE_FIXTURES=1 to rewrite `fixtures/replay.json`.
#[test]
fn committed_replay_matches_scripts() {
    let fresh = record_all(&scripts(), &InducerConfig::default()).unwrap();
    let path = dir().join("replay.json");
    if std::env::var_os("MEO_UPDATE_FIXTURES").is_some() {
        std::fs::write(&path, fresh.to_json_pretty()).unwrap();
    }
    let committed = FixtureMap::load(&path).unwrap();
    assert_eq!(committed, fresh, "replay.json is stale; rerun with MEO_UPDATE_FIXTURES=1");
}

#[test]
fn replay_reproduces_every_scripted_turn() {
    let backend = replay();
    let cfg = InducerConfig::default();
    for s in scripts() {
        let clip = s.clip();
        let (_, recorded) = record_script(&s, &cfg).unwrap();
        let mut history = SessionHistory::default();
        for (turn, want) in s.turns.iter().zip(recorded) {
            let got = induce(&turn.prompt, &history, &backend, &cfg, Some(&clip)).unwrap();
            assert_eq!(got, want, "{}", s.name);
            history.push(got.to_turn(&turn.prompt));
        }
    }
}

#[test]
fn worked_example_decomposition() {
    let p = EditPrompt::new("The character does a squat. At the bottom of the squat, jump into the air.", "The character does a squat");
    let out = induce(&p, &SessionHistory::default(), &replay(), &InducerConfig::default(), None).unwrap();
    let d = &out.decomposition;
    assert_eq!(d.e_ctx, "The character does a squat");
    assert_eq!(d.e_goal, "Jump into the air");
    assert_eq!(d.e_f.as_deref(), Some("At the bottom of the squat"));
    assert_eq!(out.node_trace[1].structured_output["label"], "specific moment");
    assert_eq!(out.node_trace[2].structured_output["name"], "when_waist_lowest");
    assert_eq!(d.subgoals[0].joint.to_string(), "waist");
    assert_eq!(d.subgoals[0].e_j, "To jump into the air, we need to move the waist up");
    assert_eq!(out.node_trace[4].structured_output["name"], "move_waist_up");
    assert_eq!(print_meo(&out.program), "translate(waist, up) @ when(waist, lowest, at)");
}

#[test]
fn no_time_clause_is_global_entire_motion() {
    let p = EditPrompt::new("Raise your left arm.", "A person raises the right arm");
    let out = induce(&p, &SessionHistory::default(), &replay(), &InducerConfig::default(), None).unwrap();
    assert_eq!(out.node_trace[1].structured_output["label"], "global");
    assert_eq!(out.node_trace[2].structured_output["name"], "entire_motion");
}

#[test]
fn corrective_turn_depends_on_history() {
    let p = EditPrompt::new("higher", "A person kicks with the right foot");
    let err = induce(&p, &SessionHistory::default(), &replay(), &InducerConfig::default(), None).unwrap_err();
    assert!(matches!(err, InduceError::Backend { node: NodeKind::Root, source: BackendError::MissingFixture(_) }));
}
