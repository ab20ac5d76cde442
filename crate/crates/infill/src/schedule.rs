use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::InfillError;

/// Cumulative signal coefficients alpha-bar for t = 1..=T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSchedule {
    alpha_bar: Vec<f64>,
}

impl DiffusionSchedule {
    pub const DEFAULT_STEPS: usize = 50;

    pub fn new(alpha_bar: Vec<f64>) -> Result<Self, InfillError> {
        if alpha_bar.is_empty() {
            return Err(InfillError::Schedule("no steps".into()));
        }
        if let Some(a) = alpha_bar.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(InfillError::Schedule(format!("alpha-bar {a} outside (0, 1)")));
        }
        if let Some(t) = alpha_bar.windows(2).position(|w| w[1] >= w[0]) {
            return Err(InfillError::Schedule(format!(
                "alpha-bar not strictly decreasing at t = {}",
                t + 2
            )));
        }
        Ok(Self { alpha_bar })
    }

    /// Cosine schedule with offset 0.008; per-step betas capped at 0.999.
    pub fn cosine(steps: usize) -> Self {
        let s = 0.008;
        let f = |t: f64| (((t / steps as f64) + s) / (1.0 + s) * std::f64::consts::FRAC_PI_2).cos().powi(2);
        let mut alpha_bar = Vec::with_capacity(steps);
        let mut acc = 1.0;
        for t in 1..=steps {
            let beta = (1.0 - f(t as f64) / f((t - 1) as f64)).clamp(1e-8, 0.999);
            acc *= 1.0 - beta;
            alpha_bar.push(acc);
        }
        Self::new(alpha_bar).expect("cosine schedule is valid")
    }

    pub fn steps(&self) -> usize {
        self.alpha_bar.len()
    }

    /// alpha-bar at `t` in 1..=T; t = 0 is the clean signal.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bar[t - 1]
        }
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha_bar
    }

    /// Spline weight used when blending guidance at step `t`.
    pub fn lambda(&self, t: usize) -> f64 {
        blend_lambda(t, self.steps())
    }
}

/// `(t - 1) / T`.
pub fn blend_lambda(t: usize, steps: usize) -> f64 {
    (t as f64 - 1.0) / steps as f64
}

/// `sqrt(a) x + sqrt(1 - a) eps` for a given alpha-bar in [0, 1].
pub fn noise_with_alpha(x: &Array2<f64>, alpha_bar: f64, rng: &mut impl Rng) -> Array2<f64> {
    let (sa, sn) = (alpha_bar.sqrt(), (1.0 - alpha_bar).sqrt());
    x.mapv(|v| {
        let e: f64 = rng.sample(StandardNormal);
        sa * v + sn * e
    })
}

/// Draws X_t ~ q(X_t | X).
pub fn noise_sample(
    x: &Array2<f64>,
    t: usize,
    schedule: &DiffusionSchedule,
    rng: &mut impl Rng,
) -> Result<Array2<f64>, InfillError> {
    if t == 0 || t > schedule.steps() {
        return Err(InfillError::Schedule(format!("t = {t} outside 1..={}", schedule.steps())));
    }
    Ok(noise_with_alpha(x, schedule.alpha_bar(t), rng))
}
