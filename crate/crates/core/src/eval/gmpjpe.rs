use super::EvalError;
use crate::motion::MotionClip;

/// Mean world-space distance between corresponding joints, over all frames
/// and joints, without root alignment.
pub fn g_mpjpe(a: &MotionClip, b: &MotionClip) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::Shape(format!("{} vs {} frames", a.len(), b.len())));
    }
    if a.skeleton() != b.skeleton() {
        return Err(EvalError::Shape("different skeletons".into()));
    }
    let skel = a.skeleton();
    let mut total = 0.0;
    for (pa, pb) in a.frames().iter().zip(b.frames()) {
        let (xa, xb) = (skel.positions(pa), skel.positions(pb));
        total += xa.iter().zip(&xb).map(|(p, q)| (p - q).norm()).sum::<f64>();
    }
    Ok(total / (a.len() * skel.len()) as f64)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::motion::{Pose, Quat, Skeleton, Vec3};
    use crate::synth::{MotionFamily, SynthParams};

    #[test]
    fn identity_and_rigid_offset() {
        let clip = SynthParams::canonical(MotionFamily::Kick).generate();
        assert_eq!(g_mpjpe(&clip, &clip).unwrap(), 0.0);
        let shifted: Vec<Pose> = clip
            .frames()
            .iter()
            .map(|p| {
                let mut p = p.clone();
                p.root_translation += Vec3::new(0.1, 0.0, 0.0);
                p
            })
            .collect();
        let shifted = clip.with_frames(shifted).unwrap();
        assert!((g_mpjpe(&clip, &shifted).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn hand_built_two_frame_clips() {
        use crate::motion::JointSpec;
        let skel = Arc::new(
            Skeleton::new(vec![
                JointSpec { name: "waist".into(), parent: None, offset: Vec3::zeros() },
                JointSpec { name: "arm".into(), parent: Some("waist".into()), offset: Vec3::new(1.0, 0.0, 0.0) },
            ])
            .unwrap(),
        );
        let quarter = Quat::from_axis_angle(&Vec3::z_axis(), std::f64::consts::FRAC_PI_2);
        let pose = |t: Vec3, q: Quat| Pose::new(t, vec![q, Quat::identity()]).unwrap();
        let a = MotionClip::new(
            skel.clone(),
            vec![pose(Vec3::zeros(), Quat::identity()), pose(Vec3::zeros(), Quat::identity())],
            24,
        )
        .unwrap();
        let b = MotionClip::new(
            skel,
            vec![pose(Vec3::new(0.0, 0.3, 0.0), Quat::identity()), pose(Vec3::zeros(), quarter)],
            24,
        )
        .unwrap();
        // frame 0: both joints shifted 0.3; frame 1: root 0, arm tip (1,0,0) -> (0,1,0)
        let expected = (0.3 + 0.3 + 0.0 + 2f64.sqrt()) / 4.0;
        assert!((g_mpjpe(&a, &b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        let a = SynthParams::canonical(MotionFamily::Kick).generate();
        let b = MotionClip::rest(a.skeleton().clone(), 10, 24).unwrap();
        assert!(matches!(g_mpjpe(&a, &b), Err(EvalError::Shape(_))));
    }
}
