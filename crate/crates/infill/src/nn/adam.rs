use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub lr: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub eps: f32,
    /// Global gradient-norm clip; 0 disables.
    pub clip_norm: f32,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8, clip_norm: 1.0 }
    }
}

pub struct Adam {
    pub config: AdamConfig,
    m: Vec<Array2<f32>>,
    v: Vec<Array2<f32>>,
    step: i32,
}

/// Scales `grads` in place so their joint L2 norm is at most `max`; returns the norm before clipping.
pub fn clip_global_norm(grads: &mut [Option<Array2<f32>>], max: f32) -> f32 {
    let norm = grads.iter().flatten().map(|g| g.iter().map(|x| x * x).sum::<f32>()).sum::<f32>().sqrt();
    if max > 0.0 && norm > max {
        let k = max / norm;
        for g in grads.iter_mut().flatten() {
            *g *= k;
        }
    }
    norm
}

impl Adam {
    pub fn new(config: AdamConfig, shapes: &[(usize, usize)]) -> Self {
        let zeros = || shapes.iter().map(|&s| Array2::zeros(s)).collect::<Vec<_>>();
        Self { config, m: zeros(), v: zeros(), step: 0 }
    }

    /// One update; `grads[i]` is `None` for parameters the loss did not touch.
    pub fn update(&mut self, params: &mut [Array2<f32>], mut grads: Vec<Option<Array2<f32>>>) {
        let c = self.config;
        clip_global_norm(&mut grads, c.clip_norm);
        self.step += 1;
        let bc1 = 1.0 - c.beta1.powi(self.step);
        let bc2 = 1.0 - c.beta2.powi(self.step);
        for (i, g) in grads.into_iter().enumerate() {
            let Some(g) = g else { continue };
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            m.zip_mut_with(&g, |m, &g| *m = c.beta1 * *m + (1.0 - c.beta1) * g);
            v.zip_mut_with(&g, |v, &g| *v = c.beta2 * *v + (1.0 - c.beta2) * g * g);
            let p = &mut params[i];
            ndarray::Zip::from(p).and(&*m).and(&*v).for_each(|p, &m, &v| {
                *p -= c.lr * (m / bc1) / ((v / bc2).sqrt() + c.eps);
            });
        }
    }
}
