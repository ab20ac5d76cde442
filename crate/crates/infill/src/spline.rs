//! The interpolation baseline: Catmull-Rom root translation and piecewise
//! slerp rotations between context boundaries and edited keyframes.

use meo_core::keyframe::EditedKeyframe;
use meo_core::{MotionClip, Pose, Vec3};

use crate::InfillError;

/// How many leading and trailing frames are held fixed as context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextWindow {
    pub frames: usize,
    pub start: usize,
    pub end: usize,
}

impl ContextWindow {
    /// `window` frames at each end.
    pub fn fixed(frames: usize, window: usize) -> Result<Self, InfillError> {
        if window == 0 || 2 * window >= frames {
            return Err(InfillError::Precondition(format!(
                "context window {window} leaves nothing to infill in {frames} frames"
            )));
        }
        Ok(Self { frames, start: window, end: window })
    }

    /// Up to `window` frames at each end, shrunk so no key falls inside.
    pub fn around_keys(frames: usize, window: usize, keys: &[usize]) -> Result<Self, InfillError> {
        let mut w = Self::fixed(frames, window)?;
        if let (Some(&first), Some(&last)) = (keys.iter().min(), keys.iter().max()) {
            if last >= frames {
                return Err(InfillError::Precondition(format!("key frame {last} out of range 0..{}", frames - 1)));
            }
            w.start = w.start.min(first);
            w.end = w.end.min(frames - 1 - last);
        }
        Ok(w)
    }

    pub fn is_context(&self, frame: usize) -> bool {
        frame < self.start || frame >= self.frames - self.end
    }

    pub fn check_keys(&self, keys: &[usize]) -> Result<(), InfillError> {
        for w in keys.windows(2) {
            if w[0] >= w[1] {
                return Err(InfillError::Precondition("key frames must be strictly increasing".into()));
            }
        }
        match keys.iter().find(|&&k| k >= self.frames || self.is_context(k)) {
            Some(k) => Err(InfillError::Precondition(format!(
                "key frame {k} lies inside the context window (start {}, end {})",
                self.start, self.end
            ))),
            None => Ok(()),
        }
    }
}

/// Piecewise cubic Hermite curve through `(t_k, p_k)` with tangents `m_k`
/// in units per frame.
#[derive(Debug, Clone)]
pub struct HermiteCurve {
    pub knots: Vec<f64>,
    pub values: Vec<Vec3>,
    pub tangents: Vec<Vec3>,
}

impl HermiteCurve {
    pub fn eval(&self, t: f64) -> Vec3 {
        let k = self.segment(t);
        let (t0, t1) = (self.knots[k], self.knots[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        self.values[k] * h00 + self.tangents[k] * (h10 * h) + self.values[k + 1] * h01 + self.tangents[k + 1] * (h11 * h)
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.knots.len();
        (0..n - 1).find(|&k| t <= self.knots[k + 1]).unwrap_or(n - 2)
    }
}

struct Knot<'a> {
    frame: usize,
    pose: &'a Pose,
}

fn knots<'a>(source: &'a MotionClip, keys: &'a [EditedKeyframe], w: &ContextWindow) -> Vec<Knot<'a>> {
    let mut out = Vec::new();
    if w.start > 0 {
        out.push(Knot { frame: w.start - 1, pose: &source.frames()[w.start - 1] });
    }
    out.extend(keys.iter().map(|k| Knot { frame: k.frame_index, pose: &k.pose }));
    if w.end > 0 {
        let b = w.frames - w.end;
        out.push(Knot { frame: b, pose: &source.frames()[b] });
    }
    out
}

/// Root translation curve through the knots. Interior tangents are
/// non-uniform Catmull-Rom; end tangents copy the source velocity just outside
/// the infilled span so the result is C1 against the context.
pub fn root_curve(source: &MotionClip, keys: &[EditedKeyframe], window: &ContextWindow) -> Option<HermiteCurve> {
    let ks = knots(source, keys, window);
    if ks.len() < 2 {
        return None;
    }
    let n = ks.len();
    let src = source.frames();
    let t: Vec<f64> = ks.iter().map(|k| k.frame as f64).collect();
    let p: Vec<Vec3> = ks.iter().map(|k| k.pose.root_translation).collect();
    let chord = |a: usize, b: usize| (p[b] - p[a]) / (t[b] - t[a]);
    let mut m = vec![Vec3::zeros(); n];
    for k in 1..n - 1 {
        m[k] = chord(k - 1, k + 1);
    }
    let a = ks[0].frame;
    m[0] = if window.start > 0 && a >= 1 {
        src[a].root_translation - src[a - 1].root_translation
    } else {
        chord(0, 1)
    };
    let b = ks[n - 1].frame;
    m[n - 1] = if window.end > 0 && b + 1 < window.frames {
        src[b + 1].root_translation - src[b].root_translation
    } else {
        chord(n - 2, n - 1)
    };
    Some(HermiteCurve { knots: t, values: p, tangents: m })
}

/// X_spline: context frames copied from `source`, key frames from `keys`,
/// everything in between interpolated.
pub fn spline_infill(
    source: &MotionClip,
    keys: &[EditedKeyframe],
    window: &ContextWindow,
) -> Result<MotionClip, InfillError> {
    if window.frames != source.len() {
        return Err(InfillError::Shape(format!("window for {} frames, clip has {}", window.frames, source.len())));
    }
    let key_idx: Vec<usize> = keys.iter().map(|k| k.frame_index).collect();
    window.check_keys(&key_idx)?;
    let mut frames: Vec<Pose> = source.frames().to_vec();
    for k in keys {
        frames[k.frame_index] = k.pose.clone();
    }
    let ks = knots(source, keys, window);
    let Some(curve) = root_curve(source, keys, window) else {
        return Ok(source.with_frames(frames)?);
    };
    for pair in ks.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let span = (b.frame - a.frame) as f64;
        for i in a.frame + 1..b.frame {
            let s = (i - a.frame) as f64 / span;
            let rotations = a
                .pose
                .rotations()
                .iter()
                .zip(b.pose.rotations())
                .map(|(qa, qb)| qa.slerp(qb, s))
                .collect();
            frames[i] = Pose::new(curve.eval(i as f64), rotations)?;
        }
    }
    Ok(source.with_frames(frames)?)
}
