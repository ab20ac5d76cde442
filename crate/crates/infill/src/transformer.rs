//! Toy transformer-decoder denoiser with a separate conditioning branch.
//!
//! Noisy motion tokens attend to themselves and, through cross-attention, to
//! tokens embedded from the masked condition and its mask.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::denoiser::{Denoiser, Normalizer, TrainingSample};
use crate::nn::{Adam, AdamConfig, Tape, Var};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransformerConfig {
    pub features: usize,
    pub d_model: usize,
    pub heads: usize,
    pub layers: usize,
    pub ffn: usize,
    pub adam: AdamConfig,
    pub init_seed: u64,
}

impl Default for TransformerConfig {
    fn default() -> Self {
        Self {
            features: 113,
            d_model: 64,
            heads: 4,
            layers: 2,
            ffn: 128,
            adam: AdamConfig::default(),
            init_seed: 0,
        }
    }
}

/// Named parameter tensors in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub names: Vec<String>,
    pub values: Vec<Array2<f32>>,
}

impl ParamSet {
    fn add(&mut self, name: String, value: Array2<f32>) -> usize {
        self.names.push(name);
        self.values.push(value);
        self.values.len() - 1
    }

    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.values.iter().map(|v| v.dim()).collect()
    }

    pub fn count(&self) -> usize {
        self.values.iter().map(|v| v.len()).sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Linear {
    w: usize,
    b: usize,
}

#[derive(Debug, Clone, Copy)]
struct Norm {
    gain: usize,
    bias: usize,
}

#[derive(Debug, Clone, Copy)]
struct Attention {
    q: usize,
    k: usize,
    v: usize,
    o: Linear,
}

#[derive(Debug, Clone, Copy)]
struct Block {
    n1: Norm,
    self_attn: Attention,
    n2: Norm,
    cross_attn: Attention,
    n3: Norm,
    ff1: Linear,
    ff2: Linear,
}

#[derive(Debug, Clone)]
struct Layout {
    input: Linear,
    time1: Linear,
    time2: Linear,
    cond: Linear,
    cond_norm: Norm,
    cond_ff1: Linear,
    cond_ff2: Linear,
    blocks: Vec<Block>,
    out_norm: Norm,
    out: Linear,
}

struct Builder<'a> {
    params: &'a mut ParamSet,
    rng: ChaCha8Rng,
}

impl Builder<'_> {
    fn matrix(&mut self, name: &str, rows: usize, cols: usize) -> usize {
        let bound = (6.0 / (rows + cols) as f32).sqrt();
        let v = Array2::from_shape_fn((rows, cols), |_| self.rng.random_range(-bound..bound));
        self.params.add(name.to_string(), v)
    }

    fn linear(&mut self, name: &str, i: usize, o: usize) -> Linear {
        let w = self.matrix(&format!("{name}.w"), i, o);
        let b = self.params.add(format!("{name}.b"), Array2::zeros((1, o)));
        Linear { w, b }
    }

    fn norm(&mut self, name: &str, d: usize) -> Norm {
        let gain = self.params.add(format!("{name}.gain"), Array2::ones((1, d)));
        let bias = self.params.add(format!("{name}.bias"), Array2::zeros((1, d)));
        Norm { gain, bias }
    }

    fn attention(&mut self, name: &str, d: usize) -> Attention {
        Attention {
            q: self.matrix(&format!("{name}.q"), d, d),
            k: self.matrix(&format!("{name}.k"), d, d),
            v: self.matrix(&format!("{name}.v"), d, d),
            o: self.linear(&format!("{name}.o"), d, d),
        }
    }
}

fn build(config: &TransformerConfig, params: &mut ParamSet) -> Layout {
    let (f, d, h) = (config.features, config.d_model, config.ffn);
    let mut b = Builder { params, rng: ChaCha8Rng::seed_from_u64(config.init_seed) };
    let input = b.linear("input", f, d);
    let time1 = b.linear("time1", d, d);
    let time2 = b.linear("time2", d, d);
    let cond = b.linear("cond", 2 * f, d);
    let cond_norm = b.norm("cond_norm", d);
    let cond_ff1 = b.linear("cond_ff1", d, h);
    let cond_ff2 = b.linear("cond_ff2", h, d);
    let blocks = (0..config.layers)
        .map(|l| Block {
            n1: b.norm(&format!("block{l}.n1"), d),
            self_attn: b.attention(&format!("block{l}.self"), d),
            n2: b.norm(&format!("block{l}.n2"), d),
            cross_attn: b.attention(&format!("block{l}.cross"), d),
            n3: b.norm(&format!("block{l}.n3"), d),
            ff1: b.linear(&format!("block{l}.ff1"), d, h),
            ff2: b.linear(&format!("block{l}.ff2"), h, d),
        })
        .collect();
    let out_norm = b.norm("out_norm", d);
    let out = b.linear("out", d, f);
    Layout { input, time1, time2, cond, cond_norm, cond_ff1, cond_ff2, blocks, out_norm, out }
}

/// Sinusoidal embedding of a scalar position, `dim` wide.
fn sinusoid(pos: f32, dim: usize) -> impl Iterator<Item = f32> {
    (0..dim).map(move |i| {
        let freq = 1.0 / 10_000f32.powf((2 * (i / 2)) as f32 / dim as f32);
        if i % 2 == 0 {
            (pos * freq).sin()
        } else {
            (pos * freq).cos()
        }
    })
}

fn positional(frames: usize, dim: usize) -> Array2<f32> {
    let mut pe = Array2::zeros((frames, dim));
    for (i, mut row) in pe.rows_mut().into_iter().enumerate() {
        for (v, s) in row.iter_mut().zip(sinusoid(i as f32, dim)) {
            *v = s;
        }
    }
    pe
}

pub struct ToyTransformerDenoiser {
    pub config: TransformerConfig,
    pub normalizer: Normalizer,
    pub params: ParamSet,
    layout: Layout,
    optimizer: Adam,
}

impl ToyTransformerDenoiser {
    pub fn new(config: TransformerConfig, normalizer: Normalizer) -> Self {
        assert_eq!(config.d_model % config.heads, 0, "d_model must divide into heads");
        let mut params = ParamSet { names: vec![], values: vec![] };
        let layout = build(&config, &mut params);
        let optimizer = Adam::new(config.adam, &params.shapes());
        Self { config, normalizer, params, layout, optimizer }
    }

    /// Rebuilds the model and installs `values` (same order as [`ParamSet::names`]).
    pub fn with_params(config: TransformerConfig, normalizer: Normalizer, values: Vec<Array2<f32>>) -> Result<Self, String> {
        let mut model = Self::new(config, normalizer);
        if values.len() != model.params.values.len() {
            return Err(format!("expected {} tensors, got {}", model.params.values.len(), values.len()));
        }
        for (i, (v, cur)) in values.iter().zip(&model.params.values).enumerate() {
            if v.dim() != cur.dim() {
                return Err(format!("tensor {} has shape {:?}, expected {:?}", model.params.names[i], v.dim(), cur.dim()));
            }
        }
        model.params.values = values;
        Ok(model)
    }

    fn p(&self, tape: &mut Tape, id: usize) -> Var {
        tape.param(id, &self.params.values[id])
    }

    fn linear(&self, tape: &mut Tape, x: Var, l: Linear) -> Var {
        let w = self.p(tape, l.w);
        let b = self.p(tape, l.b);
        let y = tape.matmul(x, w);
        tape.add_row(y, b)
    }

    fn norm(&self, tape: &mut Tape, x: Var, n: Norm) -> Var {
        let g = self.p(tape, n.gain);
        let b = self.p(tape, n.bias);
        let y = tape.layer_norm(x);
        let y = tape.mul_row(y, g);
        tape.add_row(y, b)
    }

    fn attention(&self, tape: &mut Tape, x: Var, ctx: Var, a: Attention) -> Var {
        let (d, heads) = (self.config.d_model, self.config.heads);
        let dh = d / heads;
        let (wq, wk, wv) = (self.p(tape, a.q), self.p(tape, a.k), self.p(tape, a.v));
        let q = tape.matmul(x, wq);
        let k = tape.matmul(ctx, wk);
        let v = tape.matmul(ctx, wv);
        let scale = 1.0 / (dh as f32).sqrt();
        let mut outs = Vec::with_capacity(heads);
        for h in 0..heads {
            let qh = tape.slice_cols(q, h * dh, dh);
            let kh = tape.slice_cols(k, h * dh, dh);
            let vh = tape.slice_cols(v, h * dh, dh);
            let kt = tape.transpose(kh);
            let s = tape.matmul(qh, kt);
            let s = tape.scale(s, scale);
            let att = tape.softmax_rows(s);
            outs.push(tape.matmul(att, vh));
        }
        let o = tape.concat_cols(&outs);
        self.linear(tape, o, a.o)
    }

    fn ffn(&self, tape: &mut Tape, x: Var, l1: Linear, l2: Linear) -> Var {
        let h = self.linear(tape, x, l1);
        let h = tape.relu(h);
        self.linear(tape, h, l2)
    }

    /// Records the forward pass; inputs are normalized features.
    fn forward(&self, tape: &mut Tape, input: &Array2<f64>, cond: &Array2<f64>, mask: &Array2<f64>, t: usize) -> Var {
        let d = self.config.d_model;
        let n = input.nrows();
        let pe = tape.constant(positional(n, d));
        let temb = Array2::from_shape_vec((1, d), sinusoid(t as f32, d).collect()).expect("d values");
        let temb = tape.constant(temb);
        let temb = self.linear(tape, temb, self.layout.time1);
        let temb = tape.relu(temb);
        let temb = self.linear(tape, temb, self.layout.time2);

        let x = tape.constant(input.mapv(|v| v as f32));
        let mut h = self.linear(tape, x, self.layout.input);
        h = tape.add(h, pe);
        h = tape.add_row(h, temb);

        let c_in = tape.constant(ndarray::concatenate![ndarray::Axis(1), cond.mapv(|v| v as f32), mask.mapv(|v| v as f32)]);
        let mut c = self.linear(tape, c_in, self.layout.cond);
        c = tape.add(c, pe);
        let cn = self.norm(tape, c, self.layout.cond_norm);
        let cf = self.ffn(tape, cn, self.layout.cond_ff1, self.layout.cond_ff2);
        c = tape.add(c, cf);

        for blk in &self.layout.blocks {
            let a = self.norm(tape, h, blk.n1);
            let sa = self.attention(tape, a, a, blk.self_attn);
            h = tape.add(h, sa);
            let a = self.norm(tape, h, blk.n2);
            let ca = self.attention(tape, a, c, blk.cross_attn);
            h = tape.add(h, ca);
            let a = self.norm(tape, h, blk.n3);
            let f = self.ffn(tape, a, blk.ff1, blk.ff2);
            h = tape.add(h, f);
        }
        let h = self.norm(tape, h, self.layout.out_norm);
        self.linear(tape, h, self.layout.out)
    }

    pub fn parameter_count(&self) -> usize {
        self.params.count()
    }
}

impl Denoiser for ToyTransformerDenoiser {
    fn name(&self) -> &str {
        "toy-transformer"
    }

    fn denoise(&self, input: &Array2<f64>, cond: &Array2<f64>, mask: &Array2<f64>, t: usize) -> Array2<f64> {
        let mut tape = Tape::new();
        let y = self.forward(&mut tape, input, cond, mask, t);
        tape.value(y).mapv(|v| v as f64)
    }

    fn normalizer(&self) -> Option<&Normalizer> {
        Some(&self.normalizer)
    }

    fn train_batch(&mut self, batch: &[TrainingSample]) -> f64 {
        if batch.is_empty() {
            return 0.0;
        }
        let mut tape = Tape::new();
        let mut total: Option<Var> = None;
        for s in batch {
            let y = self.forward(&mut tape, &s.input, &s.cond, &s.mask, s.t);
            let l = tape.mse(y, s.target.mapv(|v| v as f32), s.weights.mapv(|v| v as f32));
            total = Some(match total {
                Some(acc) => tape.add(acc, l),
                None => l,
            });
        }
        let loss = tape.scale(total.expect("non-empty batch"), 1.0 / batch.len() as f32);
        let value = tape.value(loss)[(0, 0)] as f64;
        let mut grads = tape.backward(loss);
        let ordered = (0..self.params.values.len()).map(|i| grads.remove(&i)).collect();
        self.optimizer.update(&mut self.params.values, ordered);
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ToyTransformerDenoiser {
        let config = TransformerConfig { features: 7, d_model: 16, heads: 2, layers: 1, ffn: 24, ..Default::default() };
        ToyTransformerDenoiser::new(config, Normalizer::identity(7))
    }

    #[test]
    fn output_shape_matches_input() {
        let m = tiny();
        let x = Array2::from_shape_fn((9, 7), |(i, j)| (i as f64 - j as f64) * 0.1);
        let y = m.denoise(&x, &x, &Array2::ones((9, 7)), 3);
        assert_eq!(y.dim(), (9, 7));
        assert!(y.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn overfits_a_single_sample() {
        let mut m = tiny();
        m.optimizer.config.lr = 3e-3;
        let target = Array2::from_shape_fn((8, 7), |(i, j)| ((i + 2 * j) as f64 * 0.3).sin());
        let mask = Array2::zeros((8, 7));
        let s = TrainingSample {
            input: Array2::zeros((8, 7)),
            cond: Array2::zeros((8, 7)),
            mask,
            t: 5,
            target,
            weights: Array2::ones((8, 7)),
        };
        let first = m.train_batch(std::slice::from_ref(&s));
        let mut last = first;
        for _ in 0..300 {
            last = m.train_batch(std::slice::from_ref(&s));
        }
        assert!(last < 0.05 * first, "{first} -> {last}");
    }

    #[test]
    fn deterministic_init() {
        assert_eq!(tiny().params, tiny().params);
    }
}
