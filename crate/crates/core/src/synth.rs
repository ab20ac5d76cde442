//! Procedural motion families used as fixtures and as the toy training corpus.
//!
//! Every clip is a deterministic function of its [`SynthParams`]; corpora are
//! generated from a seeded ChaCha stream so they can be regenerated exactly.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::motion::{MotionClip, Pose, Quat, Skeleton, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionFamily {
    Squat,
    Kick,
    Jump,
    ArmRaise,
}

impl MotionFamily {
    pub const ALL: [MotionFamily; 4] = [Self::Squat, Self::Kick, Self::Jump, Self::ArmRaise];

    pub fn description(self) -> &'static str {
        match self {
            Self::Squat => "The character does a squat",
            Self::Kick => "A person is kicking with the right foot",
            Self::Jump => "The character jumps in place",
            Self::ArmRaise => "The character raises an arm",
        }
    }
}

/// Parameters of one procedural clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub family: MotionFamily,
    pub frames: usize,
    pub fps: u32,
    /// Frame at which the family's main event peaks (squat bottom, kick apex...).
    pub peak_frame: usize,
    /// Half-width of the event window, in frames.
    pub half_width: usize,
    /// Family-specific amplitude in [0.5, 1.5]; 1.0 is the canonical size.
    pub amplitude: f64,
    /// Constant heading, radians about world-up.
    pub heading: f64,
    /// Root drift per frame along the heading direction.
    pub drift: f64,
    /// Mirror the family to the left side (kick, arm raise).
    pub left: bool,
    /// Amplitude of deterministic per-joint wobble in radians.
    pub wobble: f64,
    pub wobble_seed: u64,
}

fn bump(t: f64, center: f64, half_width: f64) -> f64 {
    let u = (t - center) / half_width;
    if u.abs() >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 + (PI * u).cos())
    }
}

fn rot(axis: Vec3, angle: f64) -> Quat {
    Quat::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle)
}

impl SynthParams {
    /// The 60-frame, 24 fps fixture for a family, peaking at frame 30.
    pub fn canonical(family: MotionFamily) -> Self {
        Self {
            family,
            frames: 60,
            fps: 24,
            peak_frame: 30,
            half_width: 16,
            amplitude: 1.0,
            heading: 0.0,
            drift: 0.0,
            left: false,
            wobble: 0.0,
            wobble_seed: 0,
        }
    }

    pub fn random(family: MotionFamily, rng: &mut impl Rng) -> Self {
        let frames = 60;
        let half_width = rng.random_range(8..=18);
        Self {
            family,
            frames,
            fps: 24,
            peak_frame: rng.random_range(half_width + 6..frames - half_width - 6),
            half_width,
            amplitude: rng.random_range(0.5..1.5),
            heading: rng.random_range(-PI..PI),
            drift: rng.random_range(-0.01..0.01),
            left: rng.random_bool(0.5),
            wobble: rng.random_range(0.0..0.08),
            wobble_seed: rng.random(),
        }
    }

    pub fn generate(&self) -> MotionClip {
        let skel = Arc::new(Skeleton::humanoid());
        let idx = |n: &str| skel.index_of(n).expect("humanoid joint");
        let side = if self.left { "left" } else { "right" };
        let other = if self.left { "right" } else { "left" };
        let (hip, knee, shoulder, elbow) = (
            idx(&format!("{side}_hip")),
            idx(&format!("{side}_knee")),
            idx(&format!("{side}_shoulder")),
            idx(&format!("{side}_elbow")),
        );
        let (hip2, knee2) = (idx(&format!("{other}_hip")), idx(&format!("{other}_knee")));
        let (rs, ls) = (idx("right_shoulder"), idx("left_shoulder"));
        let spine = idx("spine");
        let x = Vec3::x();
        // abduction axis for the chosen side (right side abducts about -z)
        let abduct_axis = if self.left { Vec3::z() } else { -Vec3::z() };

        let heading = Quat::from_axis_angle(&Vec3::y_axis(), self.heading);
        let forward = heading * Vec3::z();
        let a = self.amplitude;
        let (c, hw) = (self.peak_frame as f64, self.half_width as f64);

        let mut wobble_rng = ChaCha8Rng::seed_from_u64(self.wobble_seed);
        let phases: Vec<[f64; 3]> = (0..skel.len())
            .map(|_| [wobble_rng.random_range(0.0..2.0 * PI), wobble_rng.random_range(0.0..2.0 * PI), wobble_rng.random_range(0.5..2.0)])
            .collect();

        let frames = (0..self.frames)
            .map(|i| {
                let t = i as f64;
                let b = bump(t, c, hw);
                let mut root = Vec3::new(0.0, Skeleton::HUMANOID_STANDING_HEIGHT, 0.0) + forward * (self.drift * t);
                let mut pose = Pose::rest(&skel, Vec3::zeros());
                let mut set = |j: usize, q: Quat| {
                    let cur = pose.rotation(j);
                    pose.set_rotation(j, q * cur);
                };
                match self.family {
                    MotionFamily::Squat => {
                        let depth = 0.35 * a;
                        root.y -= depth * b;
                        let k = 1.6 * a * b;
                        set(hip, rot(-x, 0.8 * k));
                        set(hip2, rot(-x, 0.8 * k));
                        set(knee, rot(x, k));
                        set(knee2, rot(x, k));
                        set(spine, rot(x, 0.3 * k));
                        set(rs, rot(-x, 1.2 * b));
                        set(ls, rot(-x, 1.2 * b));
                    }
                    MotionFamily::Kick => {
                        let lift = 1.4 * a * b;
                        // knee folds on the way up and down, straight at the apex
                        let fold = 1.2 * a * (PI * (t - c) / hw).sin().abs() * bump(t, c, hw).sqrt();
                        set(hip, rot(-x, lift));
                        set(knee, rot(x, fold));
                        set(knee2, rot(x, 0.15 * b));
                        set(spine, rot(-x, 0.15 * b));
                        set(rs, rot(abduct_axis, 0.6 * b));
                        set(ls, rot(-abduct_axis, 0.6 * b));
                    }
                    MotionFamily::Jump => {
                        // crouch before and after, flight centered on the peak
                        let crouch = bump(t, c - hw * 0.75, hw * 0.4) + bump(t, c + hw * 0.75, hw * 0.4);
                        let flight = bump(t, c, hw * 0.5);
                        root.y += 0.4 * a * flight - 0.15 * crouch;
                        set(hip, rot(-x, 0.8 * crouch + 0.3 * flight));
                        set(hip2, rot(-x, 0.8 * crouch + 0.3 * flight));
                        set(knee, rot(x, 1.2 * crouch + 0.4 * flight));
                        set(knee2, rot(x, 1.2 * crouch + 0.4 * flight));
                        set(rs, rot(-x, 2.2 * flight - 0.4 * crouch));
                        set(ls, rot(-x, 2.2 * flight - 0.4 * crouch));
                    }
                    MotionFamily::ArmRaise => {
                        set(shoulder, rot(abduct_axis, 1.5 * a * b));
                        set(elbow, rot(-x, 0.3 * b));
                        root.y -= 0.01 * b;
                    }
                }
                if self.wobble > 0.0 {
                    for (j, ph) in phases.iter().enumerate().skip(1) {
                        let w = self.wobble * (ph[2] * t * 0.15 + ph[0]).sin();
                        let v = self.wobble * (ph[2] * t * 0.11 + ph[1]).cos();
                        set(j, rot(Vec3::new(1.0, 0.3, -0.2), w) * rot(Vec3::new(0.1, 0.2, 1.0), v));
                    }
                    root.y += 0.01 * self.wobble * (0.2 * t + phases[0][0]).sin();
                }
                pose.root_translation = root;
                let r = pose.rotation(0);
                pose.set_rotation(0, heading * r);
                pose
            })
            .collect();
        MotionClip::new(skel, frames, self.fps).expect("synthetic clips are valid")
    }
}

/// `count` clips cycling through the families, drawn from a seeded stream.
pub fn corpus(count: usize, seed: u64) -> Vec<(SynthParams, MotionClip)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let p = SynthParams::random(MotionFamily::ALL[i % MotionFamily::ALL.len()], &mut rng);
            let clip = p.generate();
            (p, clip)
        })
        .collect()
}

/// Seed of the committed training corpus.
pub const CORPUS_SEED: u64 = 20_240_611;
/// Size of the committed training corpus.
pub const CORPUS_SIZE: usize = 2_000;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::forward_kinematics;

    #[test]
    fn squat_bottom_is_at_peak_frame() {
        let clip = SynthParams::canonical(MotionFamily::Squat).generate();
        let heights: Vec<f64> = clip.frames().iter().map(|p| p.root_translation.y).collect();
        let argmin = (0..heights.len()).min_by(|&a, &b| heights[a].total_cmp(&heights[b])).unwrap();
        assert_eq!(argmin, 30);
    }

    #[test]
    fn kick_apex_is_at_peak_frame() {
        let mut p = SynthParams::canonical(MotionFamily::Kick);
        p.peak_frame = 40;
        p.half_width = 14;
        let clip = p.generate();
        let hy: Vec<f64> = (0..clip.len()).map(|i| forward_kinematics(&clip, i).unwrap()["right_foot"].y).collect();
        let argmax = (0..hy.len()).max_by(|&a, &b| hy[a].total_cmp(&hy[b])).unwrap();
        assert_eq!(argmax, 40);
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = corpus(8, 3);
        let b = corpus(8, 3);
        for ((pa, ca), (pb, cb)) in a.iter().zip(&b) {
            assert_eq!(pa, pb);
            assert!(ca.bitwise_eq(cb));
        }
    }
}
