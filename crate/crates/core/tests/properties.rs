use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use meo_core::eval::{fidelity_test_for, frechet_from_features, g_mpjpe};
use meo_core::keyframe::{
    apply_rotation, apply_translation, extremum_values, ik_chain, resolve_frame, solve_ik, ChainDof, EditConfig,
    IkConfig, VerbAxisTable,
};
use meo_core::lang::{
    parse_meo, print_meo, ExplicitFrame, Extremum, FrameRef, JointConstraint, Meo, MeoProgram, RotationVerb,
    TemporalRelation, TranslationDir, Vocabulary,
};
use meo_core::motion::{
    compose_root_trajectory, extract_root_trajectory, forward_kinematics, load_clip, save_clip, BodyMotion,
};
use meo_core::{Joint, MotionClip, Pose, Quat, Skeleton, Vec3};

fn pick<T: Vocabulary + std::fmt::Debug>() -> impl Strategy<Value = T> {
    (0..T::ALL.len()).prop_map(|i| T::ALL[i])
}

fn magnitude() -> impl Strategy<Value = Option<f64>> {
    prop_oneof![Just(None), (1e-3f64..1e3).prop_map(Some)]
}

fn constraint() -> impl Strategy<Value = JointConstraint> {
    prop_oneof![
        (pick::<Joint>(), pick::<RotationVerb>(), magnitude())
            .prop_map(|(j, v, m)| JointConstraint::rotate(j, v, m)),
        (pick::<Joint>(), pick::<TranslationDir>(), proptest::option::of(pick::<Joint>()), magnitude())
            .prop_map(|(j, d, r, m)| JointConstraint::translate(j, d, r, m)),
    ]
}

fn frame_ref() -> impl Strategy<Value = FrameRef> {
    prop_oneof![
        pick::<ExplicitFrame>().prop_map(FrameRef::explicit),
        (pick::<Joint>(), pick::<Extremum>(), pick::<TemporalRelation>())
            .prop_map(|(j, e, r)| FrameRef::when(j, e, r)),
        (0usize..10_000).prop_map(|frame| FrameRef::Index { frame }),
    ]
}

fn program() -> impl Strategy<Value = MeoProgram> {
    proptest::collection::vec((constraint(), frame_ref()).prop_map(|(c, f)| Meo::new(c, f)), 0..6)
        .prop_map(MeoProgram::new)
}

fn random_clip(seed: u64, len: usize) -> MotionClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let skel = Arc::new(Skeleton::humanoid());
    let frames = (0..len)
        .map(|_| {
            let t = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(0.5..1.5), rng.random_range(-1.0..1.0));
            let rotations = (0..skel.len())
                .map(|_| {
                    let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    Quat::from_scaled_axis(v)
                })
                .collect();
            Pose::new(t, rotations).unwrap()
        })
        .collect();
    MotionClip::new(skel, frames, 24).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_print_round_trip(p in program()) {
        prop_assert_eq!(parse_meo(&print_meo(&p)).unwrap(), p);
    }

    #[test]
    fn json_program_round_trip(p in program()) {
        let s = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<MeoProgram>(&s).unwrap(), p);
    }

    #[test]
    fn fk_compositional_under_translation(seed in any::<u64>(), dx in -2.0f64..2.0, dy in -2.0f64..2.0, dz in -2.0f64..2.0) {
        let clip = random_clip(seed, 4);
        let d = Vec3::new(dx, dy, dz);
        let moved = clip.with_frames(clip.frames().iter().map(|p| {
            let mut p = p.clone();
            p.root_translation += d;
            p
        }).collect()).unwrap();
        for i in 0..clip.len() {
            let a = forward_kinematics(&clip, i).unwrap();
            let b = forward_kinematics(&moved, i).unwrap();
            for (name, pa) in &a {
                prop_assert!((b[name] - (pa + d)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn trajectory_round_trip(seed in any::<u64>()) {
        let clip = random_clip(seed, 8);
        let back = compose_root_trajectory(&clip, &extract_root_trajectory(&clip), &BodyMotion::of(&clip)).unwrap();
        for (a, b) in clip.frames().iter().zip(back.frames()) {
            prop_assert_eq!(a.root_translation, b.root_translation);
            for (qa, qb) in a.rotations().iter().zip(b.rotations()) {
                prop_assert!((qa.as_ref() - qb.as_ref()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn clip_json_round_trip(seed in any::<u64>()) {
        let clip = random_clip(seed, 3);
        let bytes = save_clip(&clip);
        let back = load_clip(&bytes).unwrap();
        prop_assert!(back.bitwise_eq(&clip));
        prop_assert_eq!(save_clip(&back), bytes);
    }

    #[test]
    fn extremum_matches_brute_force(seed in any::<u64>(), j in pick::<Joint>(), e in pick::<Extremum>()) {
        prop_assume!(!(j == Joint::Waist && matches!(e, Extremum::Furthest | Extremum::Closest)));
        let clip = random_clip(seed, 15);
        let root = clip.skeleton().joint(0).name.clone();
        let values: Vec<f64> = (0..clip.len()).map(|i| {
            let fk = forward_kinematics(&clip, i).unwrap();
            let p = fk[j.as_str()];
            match e {
                Extremum::Highest | Extremum::Lowest => p.y,
                _ => {
                    let d = p - fk[&root];
                    (d.x * d.x + d.z * d.z).sqrt()
                }
            }
        }).collect();
        prop_assert_eq!(&extremum_values(&clip, j, e).unwrap(), &values);
        let mut best = 0;
        for i in 1..values.len() {
            let better = match e {
                Extremum::Highest | Extremum::Furthest => values[i] > values[best],
                _ => values[i] < values[best],
            };
            if better {
                best = i;
            }
        }
        let r = resolve_frame(&clip, &FrameRef::when(j, e, TemporalRelation::At), &EditConfig::default()).unwrap();
        prop_assert_eq!(r.frame_index, best);
        let before = resolve_frame(&clip, &FrameRef::when(j, e, TemporalRelation::Before), &EditConfig::default()).unwrap();
        prop_assert_eq!(before.frame_index, best.saturating_sub(6));
        let after = resolve_frame(&clip, &FrameRef::when(j, e, TemporalRelation::After), &EditConfig::default()).unwrap();
        prop_assert_eq!(after.frame_index, (best + 6).min(clip.len() - 1));
    }

    #[test]
    fn rotation_locality_and_zero_identity(seed in any::<u64>(), j in pick::<Joint>(), v in pick::<RotationVerb>(), deg in -90.0f64..90.0) {
        prop_assume!(VerbAxisTable::standard().is_applicable(j, v));
        let clip = random_clip(seed, 2);
        let k = clip.skeleton().index_of(j.as_str()).unwrap();
        let kf = apply_rotation(&clip, 1, j, v, deg).unwrap();
        for (i, (a, b)) in kf.pose.rotations().iter().zip(clip.frames()[1].rotations()).enumerate() {
            if i != k {
                prop_assert_eq!(a.coords, b.coords);
            }
        }
        prop_assert_eq!(kf.pose.root_translation, clip.frames()[1].root_translation);
        let zero = apply_rotation(&clip, 1, j, v, 0.0).unwrap();
        prop_assert!(zero.pose.bitwise_eq(&clip.frames()[1]));
    }

    #[test]
    fn translation_locality(seed in any::<u64>(), j in pick::<Joint>(), d in pick::<TranslationDir>()) {
        prop_assume!(!(d.is_lateral() && matches!(j, Joint::Waist | Joint::Head)));
        let clip = random_clip(seed, 2);
        let skel = clip.skeleton();
        let chain: Vec<usize> = ik_chain(skel, j).unwrap().into_iter().filter_map(|c| match c {
            ChainDof::Rotation(i) => Some(i),
            ChainDof::RootTranslation => None,
        }).collect();
        let kf = apply_translation(&clip, 0, j, d, None, Some(0.05), &EditConfig::default()).unwrap();
        for (i, (a, b)) in kf.pose.rotations().iter().zip(clip.frames()[0].rotations()).enumerate() {
            if !chain.contains(&i) {
                prop_assert_eq!(a.coords, b.coords);
            }
        }
        let zero = apply_translation(&clip, 0, j, d, None, Some(0.0), &EditConfig::default()).unwrap();
        prop_assert!(zero.pose.bitwise_eq(&clip.frames()[0]));
    }

    #[test]
    fn ik_reaches_targets_inside_reach(seed in any::<u64>(), limb in 0usize..4, frac in 0.0f64..1.0, theta in 0.0f64..std::f64::consts::TAU, cz in -1.0f64..1.0) {
        let clip = random_clip(seed, 1.max(2));
        let skel = clip.skeleton();
        let (effector, base) = [
            ("right_hand", "right_shoulder"),
            ("left_hand", "left_shoulder"),
            ("right_foot", "right_hip"),
            ("left_foot", "left_hip"),
        ][limb];
        let e = skel.index_of(effector).unwrap();
        let mid = skel.parent(e).unwrap();
        let (l1, l2) = (skel.joint(mid).offset.norm(), skel.joint(e).offset.norm());
        let pose = &clip.frames()[0];
        let b = skel.positions(pose)[skel.index_of(base).unwrap()];
        let (lo, hi) = ((l1 - l2).abs() + 0.02, 0.95 * (l1 + l2));
        let r = lo + frac * (hi - lo);
        let s = (1.0 - cz * cz).sqrt();
        let target = b + Vec3::new(s * theta.cos(), cz, s * theta.sin()) * r;
        let chain = ik_chain(skel, Joint::parse_word(effector).unwrap()).unwrap();
        let out = solve_ik(skel, pose, e, &chain, target, &IkConfig::default());
        prop_assert!(out.residual <= 1e-3, "residual {} after {}", out.residual, out.iterations);
        prop_assert!(out.iterations <= 200);
        prop_assert!((skel.positions(&out.pose)[e] - target).norm() <= 1e-3);
    }

    #[test]
    fn g_mpjpe_pseudometric(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (x, y, z) = (random_clip(a, 3), random_clip(b, 3), random_clip(c, 3));
        let xy = g_mpjpe(&x, &y).unwrap();
        prop_assert!(xy >= 0.0);
        prop_assert_eq!(xy, g_mpjpe(&y, &x).unwrap());
        prop_assert_eq!(g_mpjpe(&x, &x).unwrap(), 0.0);
        prop_assert!(xy <= g_mpjpe(&x, &z).unwrap() + g_mpjpe(&z, &y).unwrap() + 1e-12);
    }

    #[test]
    fn frechet_permutation_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = |rng: &mut ChaCha8Rng, n| (0..n).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>()).collect::<Vec<_>>();
        let a = rows(&mut rng, 12);
        let b = rows(&mut rng, 12);
        let mut pa = a.clone();
        let mut pb = b.clone();
        pa.reverse();
        pb.rotate_left(5);
        let d0 = frechet_from_features(&a, &b).unwrap().distance;
        let d1 = frechet_from_features(&pa, &pb).unwrap().distance;
        prop_assert!((d0 - d1).abs() < 1e-9);
        prop_assert!((d0 - frechet_from_features(&b, &a).unwrap().distance).abs() < 1e-9);
    }

    #[test]
    fn translation_fidelity_monotone(seed in any::<u64>(), j in pick::<Joint>(), d in pick::<TranslationDir>(), m1 in 0.0f64..0.3, extra in 0.0f64..0.3) {
        prop_assume!(!(d.is_lateral() && matches!(j, Joint::Waist | Joint::Head)));
        let clip = random_clip(seed, 2);
        let meo = Meo::new(JointConstraint::translate(j, d, None, Some(0.2)), FrameRef::explicit(ExplicitFrame::Start));
        let test = fidelity_test_for(&meo, &EditConfig::default());
        // executed offsets applied directly to the waist so the achieved motion is exact
        let shift = |m: f64| {
            let heading = meo_core::motion::yaw_of(&clip.frames()[0].rotation(0));
            let u = meo_core::keyframe::direction_vector(d, j, &heading);
            let mut p = clip.frames()[0].clone();
            p.root_translation += u * m;
            clip.with_frame(0, p).unwrap()
        };
        let small = test.evaluate(&clip, &shift(m1)).unwrap();
        let large = test.evaluate(&clip, &shift(m1 + extra)).unwrap();
        prop_assert!(!small || large);
    }
}

#[test]
fn vocabulary_is_closed() {
    assert_eq!(Joint::ALL.len(), 14);
    assert_eq!(RotationVerb::ALL.len(), 4);
    assert_eq!(TranslationDir::ALL.len(), 6);
    assert_eq!(ExplicitFrame::ALL.len(), 4);
    assert_eq!(TemporalRelation::ALL.len(), 3);
    assert_eq!(Extremum::ALL.len(), 4);
    for bad in ["neck", "spine", "right_clavicle", "toe"] {
        assert!(parse_meo(&format!("rotate({bad}, flex) @ start")).is_err());
    }
    assert!(parse_meo("translate(head, left) @ start").is_err());
    assert!(parse_meo("rotate(head, twist) @ start").is_err());
    assert!(parse_meo("rotate(head, flex) @ when(head, highest, during)").is_err());
}
