//! Denoiser training on fixed-length clips.

use meo_core::synth::{corpus, CORPUS_SEED};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::denoiser::{batch_loss, ContextMeanDenoiser, Denoiser, Normalizer, TrainingSample};
use crate::features::{clip_to_tensor, FrameAttributeMask, MotionLayout};
use crate::schedule::{noise_sample, DiffusionSchedule};
use crate::transformer::{ToyTransformerDenoiser, TransformerConfig};
use crate::InfillError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    /// Context frames at each end of a training mask.
    pub window: usize,
    /// Probability that the root group is conditioned on every frame.
    pub root_condition_prob: f64,
    /// Restrict the loss to infilled entries instead of the whole sequence.
    pub loss_on_infilled_only: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { steps: 2000, batch_size: 8, window: 5, root_condition_prob: 0.5, loss_on_infilled_only: false, seed: 0 }
    }
}

/// W-frame contexts at both ends, one or two interior keys, and with
/// probability `root_prob` the whole root row.
pub fn sample_training_mask(
    frames: usize,
    layout: MotionLayout,
    window: usize,
    root_prob: f64,
    rng: &mut impl Rng,
) -> FrameAttributeMask {
    let mut m = FrameAttributeMask::zeros(frames, layout);
    for f in (0..window.min(frames)).chain(frames.saturating_sub(window)..frames) {
        m.set_frame(f, true);
    }
    if frames > 2 * window {
        let keys = rng.random_range(1..=2);
        for _ in 0..keys {
            m.set_frame(rng.random_range(window..frames - window), true);
        }
    }
    if rng.random_bool(root_prob) {
        for f in 0..frames {
            m.set(f, 0, true);
        }
    }
    m
}

/// Builds one example from a clean tensor already in model space.
pub fn make_sample(
    x: &Array2<f64>,
    mask: &FrameAttributeMask,
    t: usize,
    schedule: &DiffusionSchedule,
    infilled_only: bool,
    rng: &mut impl Rng,
) -> Result<TrainingSample, InfillError> {
    let noisy = noise_sample(x, t, schedule, rng)?;
    let m = mask.expand();
    if m.dim() != x.dim() {
        return Err(InfillError::Shape(format!("mask {:?} vs clip {:?}", m.dim(), x.dim())));
    }
    let cond = &m * x;
    let input = &cond + &((1.0 - &m) * &noisy);
    let weights = if infilled_only { 1.0 - &m } else { Array2::ones(x.raw_dim()) };
    Ok(TrainingSample { input, cond, mask: m, t, target: x.clone(), weights })
}

fn to_model_space<D: Denoiser + ?Sized>(denoiser: &D, x: &Array2<f64>) -> Array2<f64> {
    match denoiser.normalizer() {
        Some(n) => n.apply(x),
        None => x.clone(),
    }
}

/// One optimization step on a batch of raw feature tensors; returns the loss.
pub fn training_step<D: Denoiser + ?Sized>(
    denoiser: &mut D,
    batch: &[Array2<f64>],
    schedule: &DiffusionSchedule,
    config: &TrainConfig,
    layout: MotionLayout,
    rng: &mut impl Rng,
) -> Result<f64, InfillError> {
    let mut samples = Vec::with_capacity(batch.len());
    for x in batch {
        if x.ncols() != layout.features() {
            return Err(InfillError::Shape(format!("{} features, layout has {}", x.ncols(), layout.features())));
        }
        let x = to_model_space(denoiser, x);
        let mask = sample_training_mask(x.nrows(), layout, config.window, config.root_condition_prob, rng);
        let t = rng.random_range(1..=schedule.steps());
        samples.push(make_sample(&x, &mask, t, schedule, config.loss_on_infilled_only, rng)?);
    }
    Ok(denoiser.train_batch(&samples))
}

/// Fixed held-out examples (infilled-entry loss) for comparing denoisers.
pub fn heldout_samples(
    data: &[Array2<f64>],
    normalizer: &Normalizer,
    schedule: &DiffusionSchedule,
    layout: MotionLayout,
    window: usize,
    rng: &mut impl Rng,
) -> Result<Vec<TrainingSample>, InfillError> {
    data.iter()
        .map(|x| {
            let x = normalizer.apply(x);
            let mask = sample_training_mask(x.nrows(), layout, window, 0.5, rng);
            let t = rng.random_range(1..=schedule.steps());
            make_sample(&x, &mask, t, schedule, true, rng)
        })
        .collect()
}

pub fn heldout_loss<D: Denoiser + ?Sized>(denoiser: &D, samples: &[TrainingSample]) -> f64 {
    batch_loss(denoiser, samples)
}

/// Per-step losses plus a trailing moving average.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainReport {
    pub losses: Vec<f64>,
}

impl TrainReport {
    /// Mean of the last `n` (or first `n` when `from_start`) losses.
    pub fn smoothed(&self, n: usize, from_start: bool) -> f64 {
        let n = n.min(self.losses.len()).max(1);
        let s = if from_start { &self.losses[..n] } else { &self.losses[self.losses.len() - n..] };
        s.iter().sum::<f64>() / s.len() as f64
    }
}

/// Runs `config.steps` steps, sampling batches uniformly from `data`.
pub fn train<D: Denoiser + ?Sized>(
    denoiser: &mut D,
    data: &[Array2<f64>],
    schedule: &DiffusionSchedule,
    config: &TrainConfig,
    layout: MotionLayout,
    rng: &mut impl Rng,
    mut progress: impl FnMut(usize, f64),
) -> Result<TrainReport, InfillError> {
    if data.is_empty() {
        return Err(InfillError::Precondition("no training data".into()));
    }
    let mut report = TrainReport::default();
    for step in 0..config.steps {
        let batch: Vec<Array2<f64>> =
            (0..config.batch_size).map(|_| data[rng.random_range(0..data.len())].clone()).collect();
        let loss = training_step(denoiser, &batch, schedule, config, layout, rng)?;
        report.losses.push(loss);
        progress(step, loss);
    }
    Ok(report)
}

/// Held-out comparison of a freshly trained toy transformer against the
/// context-mean predictor on the seeded synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SanityRun {
    pub train_clips: usize,
    pub heldout_clips: usize,
    pub corpus_seed: u64,
    pub heldout_seed: u64,
    pub model: TransformerConfig,
    pub train: TrainConfig,
}

impl Default for SanityRun {
    fn default() -> Self {
        Self {
            train_clips: 256,
            heldout_clips: 32,
            corpus_seed: CORPUS_SEED,
            heldout_seed: 99,
            model: TransformerConfig::default(),
            train: TrainConfig { seed: 1, ..Default::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityOutcome {
    pub context_mean_loss: f64,
    pub model_loss: f64,
    pub train_loss_first: f64,
    pub train_loss_last: f64,
}

impl SanityRun {
    pub fn run(&self, progress: impl FnMut(usize, f64)) -> Result<(SanityOutcome, ToyTransformerDenoiser, TrainReport), InfillError> {
        let clips = corpus(self.train_clips + self.heldout_clips, self.corpus_seed);
        let layout = MotionLayout::of(clips[0].1.skeleton());
        let tensors: Vec<_> = clips.iter().map(|(_, c)| clip_to_tensor(c)).collect();
        let (train_set, held) = tensors.split_at(self.train_clips);
        let normalizer = Normalizer::fit(train_set);
        let schedule = DiffusionSchedule::cosine(DiffusionSchedule::DEFAULT_STEPS);
        let mut rng = ChaCha8Rng::seed_from_u64(self.heldout_seed);
        let samples = heldout_samples(held, &normalizer, &schedule, layout, self.train.window, &mut rng)?;
        let context_mean_loss = heldout_loss(&ContextMeanDenoiser, &samples);
        let mut model = ToyTransformerDenoiser::new(self.model.clone(), normalizer);
        let mut rng = ChaCha8Rng::seed_from_u64(self.train.seed);
        let report = train(&mut model, train_set, &schedule, &self.train, layout, &mut rng, progress)?;
        let outcome = SanityOutcome {
            context_mean_loss,
            model_loss: heldout_loss(&model, &samples),
            train_loss_first: report.smoothed(50, true),
            train_loss_last: report.smoothed(50, false),
        };
        Ok((outcome, model, report))
    }
}

#[cfg(test)]
mod tests {
    use meo_core::synth::{MotionFamily, SynthParams};

    use super::*;
    use crate::denoiser::SmoothingOracleDenoiser;

    #[test]
    fn masks_have_contexts_and_keys() {
        let layout = MotionLayout { joints: 3 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let m = sample_training_mask(60, layout, 5, 0.5, &mut rng);
            for f in (0..5).chain(55..60) {
                assert!(m.frame_fully_set(f));
            }
            let keys = (5..55).filter(|&f| m.frame_fully_set(f)).count();
            assert!((1..=2).contains(&keys));
        }
    }

    #[test]
    fn oracle_step_changes_nothing() {
        let clip = SynthParams::canonical(MotionFamily::Squat).generate();
        let x = clip_to_tensor(&clip);
        let layout = MotionLayout::of(clip.skeleton());
        let mut d = SmoothingOracleDenoiser::new(2);
        let before = d;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let loss = training_step(&mut d, &[x.clone(), x], &DiffusionSchedule::cosine(50), &TrainConfig::default(), layout, &mut rng)
            .unwrap();
        assert!(loss.is_finite() && loss > 0.0);
        assert_eq!(d, before);
    }

    #[test]
    fn full_mask_input_is_clean() {
        let x = Array2::from_shape_fn((6, 11), |(i, j)| (i * j) as f64);
        let layout = MotionLayout { joints: 1 };
        let mask = FrameAttributeMask::ones(6, layout);
        let s = make_sample(&x, &mask, 3, &DiffusionSchedule::cosine(10), false, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        assert_eq!(s.input, x);
    }

    #[test]
    fn shape_mismatch() {
        let layout = MotionLayout { joints: 2 };
        let mut d = SmoothingOracleDenoiser::new(1);
        let bad = Array2::zeros((10, 5));
        let r = training_step(&mut d, &[bad], &DiffusionSchedule::cosine(10), &TrainConfig::default(), layout, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(r, Err(InfillError::Shape(_))));
    }
}
