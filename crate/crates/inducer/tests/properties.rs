//! Induction over randomly scripted agents that always answer validly.

use meo_core::lang::{spatial_names, temporal_names, validate_meo, DiagnosticKind, FrameRef, Vocabulary};
use meo_core::synth::{MotionFamily, SynthParams};
use meo_core::Joint;
use meo_inducer::{induce, EditPrompt, InducerConfig, NodeKind, ScriptedBackend, SessionHistory};
use proptest::prelude::*;
use proptest::sample::select;

fn reply(v: serde_json::Value) -> String {
    v.to_string()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_order_and_closed_vocabulary(
        global in any::<bool>(),
        t_pick in any::<prop::sample::Index>(),
        joints in prop::sample::subsequence(Joint::ALL.to_vec(), 1..4),
        s_picks in prop::collection::vec(any::<prop::sample::Index>(), 3),
        family in select(MotionFamily::ALL.to_vec()),
    ) {
        let clip = SynthParams::canonical(family).generate();
        let frames: Vec<String> = temporal_names()
            .into_iter()
            .filter(|(_, f)| matches!(f, FrameRef::Explicit { .. }) == global)
            .map(|(n, _)| n)
            .collect();
        let mut replies = vec![
            reply(serde_json::json!({"e_ctx": "c", "e_goal": "g", "e_f": "f", "justification": "j"})),
            reply(serde_json::json!({"label": if global { "global" } else { "specific moment" }, "justification": "j"})),
            reply(serde_json::json!({"name": t_pick.get(&frames), "justification": "j"})),
            reply(serde_json::json!({"joints": joints.iter().map(|j| serde_json::json!({"joint": j.as_str(), "sub_goal": "s"})).collect::<Vec<_>>()})),
        ];
        for (j, pick) in joints.iter().zip(&s_picks) {
            let names: Vec<String> = spatial_names().into_iter().filter(|(_, c)| c.joint == *j).map(|(n, _)| n).collect();
            replies.push(reply(serde_json::json!({"name": pick.get(&names), "justification": "j"})));
        }
        let b = ScriptedBackend::new(replies);
        // the scripted agent may pick a frame or constraint the clip rejects; the retry then runs dry
        let Ok(out) = induce(&EditPrompt::new("e", ""), &SessionHistory::default(), &b, &InducerConfig::default(), Some(&clip)) else {
            return Ok(());
        };
        let order: Vec<NodeKind> = out.node_trace.iter().map(|n| n.node).collect();
        prop_assert_eq!(&order[..4], &NodeKind::ALL[..4]);
        prop_assert!(order[4..].iter().all(|n| *n == NodeKind::SpatialLookup));
        prop_assert_eq!(order.len() - 4, joints.len());
        prop_assert!(validate_meo(&out.program, &clip).iter().all(|d| d.kind != DiagnosticKind::Vocabulary));
        prop_assert!(out.node_trace.iter().all(|n| n.attempts <= 3));
    }
}
