use nalgebra::Quaternion;

use super::{MotionClip, MotionError, Pose, Quat, Vec3};

/// Per-frame root translation and heading (rotation about world-up).
#[derive(Debug, Clone, PartialEq)]
pub struct RootTrajectory {
    pub translations: Vec<Vec3>,
    pub yaw_rotations: Vec<Quat>,
}

impl RootTrajectory {
    pub fn new(translations: Vec<Vec3>, yaw_rotations: Vec<Quat>) -> Result<Self, MotionError> {
        if translations.len() != yaw_rotations.len() {
            return Err(MotionError::Clip(format!(
                "trajectory has {} translations but {} rotations",
                translations.len(),
                yaw_rotations.len()
            )));
        }
        Ok(Self { translations, yaw_rotations })
    }

    pub fn len(&self) -> usize {
        self.translations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.translations.is_empty()
    }

    /// Heading angle in radians, in (-pi, pi].
    pub fn yaw_angle(&self, frame: usize) -> f64 {
        yaw_angle(&self.yaw_rotations[frame])
    }
}

/// Everything in a clip except the root trajectory: root rotations with the
/// heading removed, plus every other joint rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyMotion {
    pub frames: Vec<Pose>,
}

/// Twist component of `q` about world-up.
pub fn yaw_of(q: &Quat) -> Quat {
    let (w, y) = (q.w, q.j);
    let n = (w * w + y * y).sqrt();
    if n < 1e-12 {
        return Quat::identity();
    }
    Quat::new_unchecked(Quaternion::new(w / n, 0.0, y / n, 0.0))
}

pub fn yaw_angle(q: &Quat) -> f64 {
    let t = yaw_of(q);
    let a = 2.0 * t.j.atan2(t.w);
    // wrap into (-pi, pi]
    let tau = std::f64::consts::TAU;
    let mut a = a % tau;
    if a <= -std::f64::consts::PI {
        a += tau;
    } else if a > std::f64::consts::PI {
        a -= tau;
    }
    a
}

pub fn yaw_from_angle(angle: f64) -> Quat {
    Quat::from_axis_angle(&Vec3::y_axis(), angle)
}

/// Splits a clip into its root trajectory.
pub fn extract_root_trajectory(clip: &MotionClip) -> RootTrajectory {
    let root = clip.skeleton().root();
    let translations = clip.frames().iter().map(|p| p.root_translation).collect();
    let yaw_rotations = clip.frames().iter().map(|p| yaw_of(&p.rotation(root))).collect();
    RootTrajectory { translations, yaw_rotations }
}

impl BodyMotion {
    pub fn of(clip: &MotionClip) -> Self {
        let root = clip.skeleton().root();
        let frames = clip
            .frames()
            .iter()
            .map(|p| {
                let mut body = p.clone();
                let q = p.rotation(root);
                body.set_rotation(root, yaw_of(&q).inverse() * q);
                body.root_translation = Vec3::zeros();
                body
            })
            .collect();
        Self { frames }
    }
}

/// Inverse of [`extract_root_trajectory`] + [`BodyMotion::of`].
pub fn compose_root_trajectory(
    template: &MotionClip,
    trajectory: &RootTrajectory,
    body: &BodyMotion,
) -> Result<MotionClip, MotionError> {
    if trajectory.len() != body.frames.len() {
        return Err(MotionError::Clip("trajectory and body lengths differ".into()));
    }
    let root = template.skeleton().root();
    let frames = body
        .frames
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut p = b.clone();
            p.root_translation = trajectory.translations[i];
            p.set_rotation(root, trajectory.yaw_rotations[i] * b.rotation(root));
            p
        })
        .collect();
    template.with_frames(frames)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::motion::Skeleton;

    fn random_clip(rng: &mut ChaCha8Rng) -> MotionClip {
        let skel = Arc::new(Skeleton::humanoid());
        let frames = (0..12)
            .map(|_| {
                let mut p = Pose::rest(&skel, Vec3::new(rng.random_range(-1.0..1.0), rng.random(), rng.random()));
                for j in 0..skel.len() {
                    let v = Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                    p.set_rotation(j, Quat::from_scaled_axis(v));
                }
                p
            })
            .collect();
        MotionClip::new(skel, frames, 24).unwrap()
    }

    #[test]
    fn static_clip_has_constant_trajectory() {
        let clip = MotionClip::rest(Arc::new(Skeleton::humanoid()), 10, 24).unwrap();
        let t = extract_root_trajectory(&clip);
        assert!(t.translations.windows(2).all(|w| w[0] == w[1]));
        assert!(t.yaw_rotations.iter().all(|q| *q == Quat::identity()));
    }

    #[test]
    fn linear_root_gives_arithmetic_translations() {
        let skel = Arc::new(Skeleton::humanoid());
        let frames = (0..8).map(|i| Pose::rest(&skel, Vec3::new(0.5 * i as f64, 1.0, 0.0))).collect();
        let clip = MotionClip::new(skel, frames, 24).unwrap();
        let t = extract_root_trajectory(&clip);
        for w in t.translations.windows(3) {
            assert_eq!((w[2] - w[1]).x, (w[1] - w[0]).x);
        }
    }

    #[test]
    fn compose_extract_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let clip = random_clip(&mut rng);
            let back = compose_root_trajectory(&clip, &extract_root_trajectory(&clip), &BodyMotion::of(&clip)).unwrap();
            for (a, b) in clip.frames().iter().zip(back.frames()) {
                assert_eq!(a.root_translation, b.root_translation);
                for (qa, qb) in a.rotations().iter().zip(b.rotations()) {
                    assert!((qa.as_ref() - qb.as_ref()).norm() < 1e-12);
                }
            }
            // non-root rotations are carried untouched
            for (a, b) in clip.frames().iter().zip(back.frames()) {
                assert_eq!(&a.rotations()[1..], &b.rotations()[1..]);
            }
        }
    }

    #[test]
    fn yaw_is_twist_about_up() {
        let q = Quat::from_axis_angle(&Vec3::y_axis(), 0.7) * Quat::from_axis_angle(&Vec3::x_axis(), 0.3);
        assert!((yaw_angle(&q) - 0.7).abs() < 1e-12);
        assert!((yaw_angle(&yaw_from_angle(-2.5)) + 2.5).abs() < 1e-12);
    }
}
