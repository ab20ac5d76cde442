//! Masked-conditioning diffusion infill with optional spline guidance.

use meo_core::keyframe::EditedKeyframe;
use meo_core::motion::{yaw_of, RootTrajectory};
use meo_core::{MotionClip, Pose};
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::denoiser::Denoiser;
use crate::features::{clip_to_tensor, decode_pose, encode_pose, FrameAttributeMask, MotionLayout};
use crate::schedule::{noise_sample, DiffusionSchedule};
use crate::spline::ContextWindow;
use crate::InfillError;

/// Everything G conditions on.
#[derive(Debug, Clone)]
pub struct InfillCondition {
    pub window: ContextWindow,
    pub keyframes: Vec<EditedKeyframe>,
    pub root_trajectory: Option<RootTrajectory>,
    pub mask: FrameAttributeMask,
}

impl InfillCondition {
    /// Context and key frames are fully conditioned; with a root trajectory
    /// the root group is conditioned on every frame.
    pub fn new(
        source: &MotionClip,
        keyframes: Vec<EditedKeyframe>,
        window: ContextWindow,
        root_trajectory: Option<RootTrajectory>,
    ) -> Result<Self, InfillError> {
        let n = source.len();
        if window.frames != n {
            return Err(InfillError::Shape(format!("window for {} frames, clip has {n}", window.frames)));
        }
        let idx: Vec<usize> = keyframes.iter().map(|k| k.frame_index).collect();
        window.check_keys(&idx)?;
        if let Some(q) = &root_trajectory {
            if q.len() != n {
                return Err(InfillError::Shape(format!("root trajectory has {} frames, clip has {n}", q.len())));
            }
        }
        let layout = MotionLayout::of(source.skeleton());
        let mut mask = FrameAttributeMask::zeros(n, layout);
        for f in (0..n).filter(|&f| window.is_context(f)).chain(idx.iter().copied()) {
            mask.set_frame(f, true);
        }
        if root_trajectory.is_some() {
            for f in 0..n {
                mask.set(f, 0, true);
            }
        }
        Ok(Self { window, keyframes, root_trajectory, mask })
    }

    pub fn infill_frames(&self) -> Vec<usize> {
        (0..self.mask.frames()).filter(|&f| !self.mask.frame_fully_set(f)).collect()
    }

    /// C in raw feature space: source at context frames, edited poses at key
    /// frames, Q-hat in the root group where conditioned; zeros elsewhere.
    pub fn tensor(&self, source: &MotionClip) -> Array2<f64> {
        let skel = source.skeleton();
        let mut c = clip_to_tensor(source);
        for k in &self.keyframes {
            encode_pose(skel, &k.pose, c.row_mut(k.frame_index).as_slice_mut().expect("contiguous row"));
        }
        if let Some(q) = &self.root_trajectory {
            let root = skel.root();
            let layout = self.mask.layout();
            let mut row = vec![0.0; layout.features()];
            for f in 0..source.len() {
                let mut p = source.frames()[f].clone();
                p.root_translation = q.translations[f];
                let r = p.rotation(root);
                p.set_rotation(root, q.yaw_rotations[f] * yaw_of(&r).inverse() * r);
                encode_pose(skel, &p, &mut row);
                c.row_mut(f).slice_mut(ndarray::s![layout.group_columns(0)]).assign(&ndarray::ArrayView1::from(&row[..5]));
            }
        }
        c * self.mask.expand()
    }

    /// Builds the output clip from a generated tensor: conditioned frames are
    /// copied bitwise, the root follows Q-hat when present.
    pub fn assemble(&self, source: &MotionClip, generated: &Array2<f64>) -> Result<MotionClip, InfillError> {
        let skel = source.skeleton();
        let root = skel.root();
        let mut frames: Vec<Pose> = source.frames().to_vec();
        for k in &self.keyframes {
            frames[k.frame_index] = k.pose.clone();
        }
        for f in self.infill_frames() {
            let mut p = decode_pose(skel, &generated.row(f).to_vec());
            if let Some(q) = &self.root_trajectory {
                p.root_translation = q.translations[f];
                let r = p.rotation(root);
                p.set_rotation(root, q.yaw_rotations[f] * (yaw_of(&r).inverse() * r));
            }
            frames[f] = p;
        }
        Ok(source.with_frames(frames)?)
    }
}

/// X_E from G. Runs t = T..1 in the denoiser's feature space. With
/// `guidance`, after each re-noising the infilled entries are pulled towards
/// the guidance clip noised to the same level, with weight (t-1)/T.
pub fn generative_infill<D: Denoiser + ?Sized>(
    denoiser: &D,
    source: &MotionClip,
    condition: &InfillCondition,
    schedule: &DiffusionSchedule,
    guidance: Option<&MotionClip>,
    rng: &mut impl Rng,
) -> Result<MotionClip, InfillError> {
    let layout = MotionLayout::of(source.skeleton());
    if condition.mask.frames() != source.len() || condition.mask.layout() != layout {
        return Err(InfillError::Shape("condition does not match clip".into()));
    }
    if let Some(g) = guidance {
        if g.len() != source.len() || g.skeleton() != source.skeleton() {
            return Err(InfillError::Shape("guidance clip does not match source".into()));
        }
    }
    if condition.infill_frames().is_empty() {
        return condition.assemble(source, &clip_to_tensor(source));
    }

    let to_model = |x: Array2<f64>| match denoiser.normalizer() {
        Some(n) => n.apply(&x),
        None => x,
    };
    let m = condition.mask.expand();
    let inv = 1.0 - &m;
    let c = &m * &to_model(condition.tensor(source));
    let g = guidance.map(|g| to_model(clip_to_tensor(g)));

    let steps = schedule.steps();
    let mut x_t: Array2<f64> = Array2::from_shape_simple_fn(c.raw_dim(), || rng.sample(StandardNormal));
    let mut x0 = c.clone();
    for t in (1..=steps).rev() {
        let input = &c + &(&inv * &x_t);
        x0 = denoiser.denoise(&input, &c, &m, t);
        if x0.dim() != c.dim() {
            return Err(InfillError::Shape(format!("denoiser returned {:?}, expected {:?}", x0.dim(), c.dim())));
        }
        if t > 1 {
            let a = schedule.alpha_bar(t - 1);
            let noise: Array2<f64> = Array2::from_shape_simple_fn(c.raw_dim(), || rng.sample(StandardNormal));
            x_t = &x0 * a.sqrt() + &noise * (1.0 - a).sqrt();
            if let Some(g) = &g {
                let lambda = schedule.lambda(t);
                let g_t = noise_sample(g, t - 1, schedule, rng)?;
                let blended = &x_t * (1.0 - lambda) + &g_t * lambda;
                x_t = &m * &x_t + &inv * &blended;
            }
        }
    }
    let out = match denoiser.normalizer() {
        Some(n) => n.invert(&x0),
        None => x0,
    };
    condition.assemble(source, &out)
}
