//! Root trajectory completion (Q-hat) from context and keyframe roots.

use meo_core::keyframe::EditedKeyframe;
use meo_core::motion::{yaw_angle, yaw_from_angle, yaw_of, RootTrajectory};
use meo_core::{MotionClip, Quat, Vec3};

use crate::spline::ContextWindow;
use crate::InfillError;

/// Natural cubic spline through `(ts[i], ys[i])`, `ts` strictly increasing.
#[derive(Debug, Clone)]
pub struct NaturalCubic {
    ts: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalCubic {
    pub fn fit(ts: &[f64], ys: &[f64]) -> Self {
        assert_eq!(ts.len(), ys.len());
        assert!(!ts.is_empty());
        let n = ts.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for the interior second derivatives (Thomas algorithm)
            let h: Vec<f64> = ts.windows(2).map(|w| w[1] - w[0]).collect();
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for r in 0..k {
                let i = r + 1;
                diag[r] = 2.0 * (h[i - 1] + h[i]);
                upper[r] = h[i];
                rhs[r] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
            }
            for r in 1..k {
                let w = h[r] / diag[r - 1];
                diag[r] -= w * upper[r - 1];
                rhs[r] -= w * rhs[r - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for r in (0..k - 1).rev() {
                m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
            }
        }
        Self { ts: ts.to_vec(), ys: ys.to_vec(), m }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.ts.len();
        if n == 1 {
            return self.ys[0];
        }
        let i = (0..n - 1).find(|&i| t <= self.ts[i + 1]).unwrap_or(n - 2);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let (a, b) = ((t1 - t) / h, (t - t0) / h);
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Completes the root trajectory from the conditioned frames.
pub trait TrajectoryInfiller: Send + Sync {
    fn infill(
        &self,
        source: &MotionClip,
        keys: &[EditedKeyframe],
        window: &ContextWindow,
    ) -> Result<RootTrajectory, InfillError>;
}

/// Natural cubic spline regression on translation and unwrapped yaw.
#[derive(Debug, Clone, Copy, Default)]
pub struct SplineTrajectoryInfiller;

/// Conditioned root values in frame order: (frame, translation, yaw).
pub(crate) fn conditioned_roots(
    source: &MotionClip,
    keys: &[EditedKeyframe],
    window: &ContextWindow,
) -> Vec<(usize, Vec3, Quat)> {
    let root = source.skeleton().root();
    let mut out: Vec<(usize, Vec3, Quat)> = Vec::new();
    let mut ki = keys.iter().peekable();
    for (i, pose) in source.frames().iter().enumerate() {
        let pose = match ki.peek() {
            Some(k) if k.frame_index == i => &ki.next().expect("peeked").pose,
            _ if window.is_context(i) => pose,
            _ => continue,
        };
        out.push((i, pose.root_translation, yaw_of(&pose.rotation(root))));
    }
    out
}

/// Adds multiples of 2*pi so consecutive angles differ by at most pi.
pub fn unwrap_angles(angles: &[f64]) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    let mut out: Vec<f64> = Vec::with_capacity(angles.len());
    for &a in angles {
        let next = match out.last() {
            Some(&prev) => a + tau * ((prev - a) / tau).round(),
            None => a,
        };
        out.push(next);
    }
    out
}

impl TrajectoryInfiller for SplineTrajectoryInfiller {
    fn infill(
        &self,
        source: &MotionClip,
        keys: &[EditedKeyframe],
        window: &ContextWindow,
    ) -> Result<RootTrajectory, InfillError> {
        let idx: Vec<usize> = keys.iter().map(|k| k.frame_index).collect();
        window.check_keys(&idx)?;
        let cond = conditioned_roots(source, keys, window);
        let ts: Vec<f64> = cond.iter().map(|c| c.0 as f64).collect();
        let axis = |f: fn(&Vec3) -> f64| NaturalCubic::fit(&ts, &cond.iter().map(|c| f(&c.1)).collect::<Vec<_>>());
        let (sx, sy, sz) = (axis(|v| v.x), axis(|v| v.y), axis(|v| v.z));
        let yaw = unwrap_angles(&cond.iter().map(|c| yaw_angle(&c.2)).collect::<Vec<_>>());
        let syaw = NaturalCubic::fit(&ts, &yaw);

        let mut translations = Vec::with_capacity(source.len());
        let mut yaws = Vec::with_capacity(source.len());
        let mut ci = cond.iter().peekable();
        for i in 0..source.len() {
            match ci.peek() {
                Some(c) if c.0 == i => {
                    translations.push(c.1);
                    yaws.push(c.2);
                    ci.next();
                }
                _ => {
                    let t = i as f64;
                    translations.push(Vec3::new(sx.eval(t), sy.eval(t), sz.eval(t)));
                    yaws.push(yaw_from_angle(syaw.eval(t)));
                }
            }
        }
        Ok(RootTrajectory::new(translations, yaws)?)
    }
}

pub fn trajectory_infill(
    infiller: &dyn TrajectoryInfiller,
    source: &MotionClip,
    keys: &[EditedKeyframe],
    window: &ContextWindow,
) -> Result<RootTrajectory, InfillError> {
    infiller.infill(source, keys, window)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use meo_core::synth::{MotionFamily, SynthParams};
    use meo_core::{Joint, Pose};
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    /// Independent oracle: all 4(n-1) cubic coefficients from one dense solve.
    fn dense_natural(ts: &[f64], ys: &[f64], t: f64) -> f64 {
        let n = ts.len();
        let s = n - 1;
        let mut a = DMatrix::zeros(4 * s, 4 * s);
        let mut b = DVector::zeros(4 * s);
        let mut row = 0;
        // segment i: c0 + c1 u + c2 u^2 + c3 u^3 with u = t - ts[i]
        for i in 0..s {
            let h = ts[i + 1] - ts[i];
            a[(row, 4 * i)] = 1.0;
            b[row] = ys[i];
            row += 1;
            for p in 0..4 {
                a[(row, 4 * i + p)] = h.powi(p as i32);
            }
            b[row] = ys[i + 1];
            row += 1;
            if i + 1 < s {
                // first and second derivative continuity at ts[i+1]
                a[(row, 4 * i + 1)] = 1.0;
                a[(row, 4 * i + 2)] = 2.0 * h;
                a[(row, 4 * i + 3)] = 3.0 * h * h;
                a[(row, 4 * (i + 1) + 1)] = -1.0;
                row += 1;
                a[(row, 4 * i + 2)] = 2.0;
                a[(row, 4 * i + 3)] = 6.0 * h;
                a[(row, 4 * (i + 1) + 2)] = -2.0;
                row += 1;
            }
        }
        a[(row, 2)] = 2.0;
        row += 1;
        let h = ts[s] - ts[s - 1];
        a[(row, 4 * (s - 1) + 2)] = 2.0;
        a[(row, 4 * (s - 1) + 3)] = 6.0 * h;
        let c = a.lu().solve(&b).unwrap();
        let i = (0..s).find(|&i| t <= ts[i + 1]).unwrap_or(s - 1);
        let u = t - ts[i];
        (0..4).map(|p| c[4 * i + p] * u.powi(p as i32)).sum()
    }

    fn key(clip: &MotionClip, frame: usize, dy: f64) -> EditedKeyframe {
        let mut pose: Pose = clip.frames()[frame].clone();
        pose.root_translation.y += dy;
        EditedKeyframe { frame_index: frame, pose, touched_joints: BTreeSet::from([Joint::Waist]), residual: None, warnings: vec![] }
    }

    #[test]
    fn matches_dense_oracle_on_random_knots() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(3..14);
            let mut ts: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..60.0)).collect();
            ts.sort_by(f64::total_cmp);
            ts.dedup_by(|a, b| (*a - *b).abs() < 0.5);
            if ts.len() < 3 {
                continue;
            }
            let ys: Vec<f64> = ts.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
            let s = NaturalCubic::fit(&ts, &ys);
            for k in 0..=120 {
                let t = ts[0] + (ts[ts.len() - 1] - ts[0]) * k as f64 / 120.0;
                assert!((s.eval(t) - dense_natural(&ts, &ys, t)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn random_conditions_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let clip = SynthParams::random(MotionFamily::Kick, &mut rng).generate();
            let f = rng.random_range(10..50);
            let keys = [key(&clip, f, rng.random_range(-0.5..0.5))];
            let w = ContextWindow::around_keys(60, 5, &[f]).unwrap();
            let q = SplineTrajectoryInfiller.infill(&clip, &keys, &w).unwrap();
            let cond = conditioned_roots(&clip, &keys, &w);
            let ts: Vec<f64> = cond.iter().map(|c| c.0 as f64).collect();
            let ys: Vec<f64> = cond.iter().map(|c| c.1.y).collect();
            for i in 0..60 {
                assert!((q.translations[i].y - dense_natural(&ts, &ys, i as f64)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn passes_through_lifted_key() {
        let clip = SynthParams::canonical(MotionFamily::Squat).generate();
        let keys = [key(&clip, 30, 0.5)];
        let w = ContextWindow::around_keys(60, 5, &[30]).unwrap();
        let q = SplineTrajectoryInfiller.infill(&clip, &keys, &w).unwrap();
        assert_eq!(q.translations[30], keys[0].pose.root_translation);
        for i in (0..5).chain(55..60) {
            assert_eq!(q.translations[i], clip.frames()[i].root_translation);
        }
    }

    #[test]
    fn spline_generated_source_is_a_fixed_point() {
        // build a source whose root follows the natural spline through its own conditioned frames
        let base = SynthParams::canonical(MotionFamily::Jump).generate();
        let keys = [key(&base, 25, 0.0), key(&base, 33, 0.0)];
        let w = ContextWindow::around_keys(60, 5, &[25, 33]).unwrap();
        let q = SplineTrajectoryInfiller.infill(&base, &keys, &w).unwrap();
        let root = base.skeleton().root();
        let frames: Vec<Pose> = base
            .frames()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut p = p.clone();
                p.root_translation = q.translations[i];
                let r = p.rotation(root);
                p.set_rotation(root, q.yaw_rotations[i] * yaw_of(&r).inverse() * r);
                p
            })
            .collect();
        let source = base.with_frames(frames).unwrap();
        let keys = [key(&source, 25, 0.0), key(&source, 33, 0.0)];
        let again = SplineTrajectoryInfiller.infill(&source, &keys, &w).unwrap();
        for i in 0..60 {
            assert!((again.translations[i] - source.frames()[i].root_translation).norm() < 1e-9);
            assert!(again.yaw_rotations[i].angle_to(&yaw_of(&source.frames()[i].rotation(root))) < 1e-9);
        }
    }

    #[test]
    fn unwrap_handles_wraparound() {
        let u = unwrap_angles(&[3.0, -3.0, -2.9]);
        assert!((u[1] - (std::f64::consts::TAU - 3.0)).abs() < 1e-12);
        assert!(u.windows(2).all(|w| (w[1] - w[0]).abs() <= std::f64::consts::PI));
    }
}
