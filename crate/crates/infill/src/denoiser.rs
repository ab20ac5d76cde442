//! The denoiser interface and the non-learned implementations.

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

/// One training example, already in the denoiser's feature space.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    /// `M * X + (1 - M) * X_t`.
    pub input: Array2<f64>,
    /// `M * X`.
    pub cond: Array2<f64>,
    /// Per-feature mask.
    pub mask: Array2<f64>,
    pub t: usize,
    pub target: Array2<f64>,
    /// Per-entry loss weights.
    pub weights: Array2<f64>,
}

/// G: predicts the clean motion tensor from a partially noised one.
pub trait Denoiser: Send + Sync {
    fn name(&self) -> &str;

    fn denoise(&self, input: &Array2<f64>, cond: &Array2<f64>, mask: &Array2<f64>, t: usize) -> Array2<f64>;

    /// Per-feature standardization the model works in; `None` means raw features.
    fn normalizer(&self) -> Option<&Normalizer> {
        None
    }

    /// One optimizer step on `batch`; returns the batch loss. Models without
    /// parameters just report the loss.
    fn train_batch(&mut self, batch: &[TrainingSample]) -> f64 {
        batch_loss(self, batch)
    }
}

/// Weighted mean squared error of `denoiser` on each sample, averaged.
pub fn batch_loss<D: Denoiser + ?Sized>(denoiser: &D, batch: &[TrainingSample]) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    batch
        .iter()
        .map(|s| weighted_mse(&denoiser.denoise(&s.input, &s.cond, &s.mask, s.t), &s.target, &s.weights))
        .sum::<f64>()
        / batch.len() as f64
}

pub fn weighted_mse(pred: &Array2<f64>, target: &Array2<f64>, weights: &Array2<f64>) -> f64 {
    let d = pred - target;
    (&d * &d * weights).sum() / weights.sum().max(1.0)
}

/// Per-feature mean and standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    /// Features with spread below this are left unscaled.
    pub const MIN_STD: f64 = 1e-3;

    pub fn identity(features: usize) -> Self {
        Self { mean: vec![0.0; features], std: vec![1.0; features] }
    }

    pub fn fit(tensors: &[Array2<f64>]) -> Self {
        let rows: Vec<_> = tensors.iter().map(|t| t.view()).collect();
        let all = ndarray::concatenate(Axis(0), &rows).expect("tensors share a layout");
        let mean = all.mean_axis(Axis(0)).expect("non-empty");
        let std = all.std_axis(Axis(0), 0.0).mapv(|s| if s < Self::MIN_STD { 1.0 } else { s });
        Self { mean: mean.to_vec(), std: std.to_vec() }
    }

    pub fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut y = x.clone();
        for mut row in y.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        y
    }

    pub fn invert(&self, y: &Array2<f64>) -> Array2<f64> {
        let mut x = y.clone();
        for mut row in x.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = *v * self.std[j] + self.mean[j];
            }
        }
        x
    }
}

/// Centered moving average over frames, window truncated at the clip ends.
pub fn moving_average(x: &Array2<f64>, radius: usize) -> Array2<f64> {
    let n = x.nrows();
    let mut out = Array2::zeros(x.raw_dim());
    for i in 0..n {
        let (lo, hi) = (i.saturating_sub(radius), (i + radius).min(n - 1));
        let mean = x.slice(ndarray::s![lo..=hi, ..]).mean_axis(Axis(0)).expect("non-empty window");
        out.row_mut(i).assign(&mean);
    }
    out
}

/// Deterministic stand-in for a learned G: low-pass the input over time and
/// optionally re-pin the conditioned entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingOracleDenoiser {
    pub radius: usize,
    pub repin: bool,
}

impl SmoothingOracleDenoiser {
    pub fn new(radius: usize) -> Self {
        Self { radius, repin: true }
    }
}

impl Denoiser for SmoothingOracleDenoiser {
    fn name(&self) -> &str {
        "smoothing-oracle"
    }

    fn denoise(&self, input: &Array2<f64>, cond: &Array2<f64>, mask: &Array2<f64>, _t: usize) -> Array2<f64> {
        let smooth = moving_average(input, self.radius);
        if self.repin {
            mask * cond + (1.0 - mask) * &smooth
        } else {
            smooth
        }
    }
}

/// Baseline: conditioned entries as given, every other entry the mean of that
/// feature over the conditioned frames.
#[derive(Debug, Clone, Copy, Default)]
pub struct ContextMeanDenoiser;

impl Denoiser for ContextMeanDenoiser {
    fn name(&self) -> &str {
        "context-mean"
    }

    fn denoise(&self, _input: &Array2<f64>, cond: &Array2<f64>, mask: &Array2<f64>, _t: usize) -> Array2<f64> {
        let count = mask.sum_axis(Axis(0));
        let sum = (mask * cond).sum_axis(Axis(0));
        let mean = ndarray::Zip::from(&sum).and(&count).map_collect(|s, c| if *c > 0.0 { s / c } else { 0.0 });
        let mut out = mask * cond;
        for (mut row, mrow) in out.rows_mut().into_iter().zip(mask.rows()) {
            for ((v, m), mu) in row.iter_mut().zip(mrow).zip(&mean) {
                if *m == 0.0 {
                    *v = *mu;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(x: &Array2<f64>, mask: Array2<f64>, t: usize) -> TrainingSample {
        TrainingSample {
            input: x.clone(),
            cond: &mask * x,
            weights: Array2::ones(x.raw_dim()),
            mask,
            t,
            target: x.clone(),
        }
    }

    #[test]
    fn full_mask_oracle_loss_is_its_distortion() {
        let x = Array2::from_shape_fn((12, 3), |(i, j)| ((i * i) as f64 * 0.1).sin() + j as f64);
        let ones = Array2::ones(x.raw_dim());
        let pinned = SmoothingOracleDenoiser::new(2);
        let mut d = pinned;
        assert_eq!(d.train_batch(&[sample(&x, ones.clone(), 3)]), 0.0);
        let mut raw = SmoothingOracleDenoiser { radius: 2, repin: false };
        let distortion = weighted_mse(&moving_average(&x, 2), &x, &ones);
        assert!(distortion > 0.0);
        assert_eq!(raw.train_batch(&[sample(&x, ones, 3)]), distortion);
        assert_eq!(d, pinned);
    }

    #[test]
    fn moving_average_of_line_is_exact_inside() {
        let x = Array2::from_shape_fn((10, 1), |(i, _)| 2.0 * i as f64);
        let y = moving_average(&x, 2);
        for i in 2..8 {
            assert!((y[(i, 0)] - x[(i, 0)]).abs() < 1e-12);
        }
        assert_eq!(y[(0, 0)], 2.0);
    }

    #[test]
    fn context_mean_baseline() {
        let x = Array2::from_shape_fn((4, 2), |(i, j)| (i + 10 * j) as f64);
        let mut m = Array2::zeros((4, 2));
        m.row_mut(0).fill(1.0);
        m.row_mut(3).fill(1.0);
        let y = ContextMeanDenoiser.denoise(&x, &(&m * &x), &m, 1);
        assert_eq!(y[(0, 1)], 10.0);
        assert_eq!(y[(1, 0)], 1.5);
        assert_eq!(y[(2, 1)], 11.5);
    }

    #[test]
    fn normalizer_round_trip() {
        let a = Array2::from_shape_fn((5, 3), |(i, j)| (i * j) as f64 + 0.5 * j as f64);
        let n = Normalizer::fit(&[a.clone()]);
        let back = n.invert(&n.apply(&a));
        assert!((back - &a).iter().all(|d| d.abs() < 1e-12));
        assert_eq!(n.std[0], 1.0);
    }
}
