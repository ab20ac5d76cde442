use std::collections::HashMap;

use ndarray::{concatenate, s, Array2, Axis};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Const,
    Param(usize),
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    MulRow(Var, Var),
    Scale(Var, f32),
    Relu(Var),
    SoftmaxRows(Var),
    /// Normalized rows; keeps 1/sigma per row for the backward pass.
    LayerNorm(Var, Vec<f32>),
    Transpose(Var),
    SliceCols(Var, usize),
    ConcatCols(Vec<Var>),
    /// Weighted squared error against a constant target.
    Mse(Var, Array2<f32>, Array2<f32>, f32),
}

struct Node {
    value: Array2<f32>,
    op: Op,
}

/// Records a forward computation; [`Tape::backward`] returns parameter gradients.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    params: HashMap<usize, Var>,
}

const LN_EPS: f32 = 1e-5;

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Array2<f32>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Array2<f32> {
        &self.nodes[v.0].value
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn constant(&mut self, value: Array2<f32>) -> Var {
        self.push(value, Op::Const)
    }

    /// Parameter `id`; repeated calls with the same id share one node.
    pub fn param(&mut self, id: usize, value: &Array2<f32>) -> Var {
        if let Some(&v) = self.params.get(&id) {
            return v;
        }
        let v = self.push(value.clone(), Op::Param(id));
        self.params.insert(id, v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::Add(a, b))
    }

    /// `a + row`, broadcasting a 1 x d row over the rows of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        let v = self.value(a) + self.value(row);
        self.push(v, Op::AddRow(a, row))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) * self.value(b);
        self.push(v, Op::Mul(a, b))
    }

    pub fn mul_row(&mut self, a: Var, row: Var) -> Var {
        let v = self.value(a) * self.value(row);
        self.push(v, Op::MulRow(a, row))
    }

    pub fn scale(&mut self, a: Var, k: f32) -> Var {
        let v = self.value(a) * k;
        self.push(v, Op::Scale(a, k))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(|x| x.max(0.0));
        self.push(v, Op::Relu(a))
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let mut v = self.value(a).clone();
        for mut row in v.rows_mut() {
            let max = row.fold(f32::NEG_INFINITY, |m, &x| m.max(x));
            row.mapv_inplace(|x| (x - max).exp());
            let sum = row.sum();
            row /= sum;
        }
        self.push(v, Op::SoftmaxRows(a))
    }

    /// Zero-mean, unit-variance rows (no affine part).
    pub fn layer_norm(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let d = x.ncols() as f32;
        let mut v = x.clone();
        let mut inv = Vec::with_capacity(x.nrows());
        for mut row in v.rows_mut() {
            let mean = row.sum() / d;
            row.mapv_inplace(|x| x - mean);
            let var = row.iter().map(|x| x * x).sum::<f32>() / d;
            let r = 1.0 / (var + LN_EPS).sqrt();
            row.mapv_inplace(|x| x * r);
            inv.push(r);
        }
        self.push(v, Op::LayerNorm(a, inv))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let v = self.value(a).t().to_owned();
        self.push(v, Op::Transpose(a))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Var {
        let v = self.value(a).slice(s![.., start..start + len]).to_owned();
        self.push(v, Op::SliceCols(a, start))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let views: Vec<_> = parts.iter().map(|p| self.value(*p).view()).collect();
        let v = concatenate(Axis(1), &views).expect("equal row counts");
        self.push(v, Op::ConcatCols(parts.to_vec()))
    }

    /// `sum(w (a - target)^2) / sum(w)` as a 1 x 1 node.
    pub fn mse(&mut self, a: Var, target: Array2<f32>, weights: Array2<f32>) -> Var {
        let diff = self.value(a) - &target;
        let wsum = weights.sum().max(1.0);
        let loss = (&diff * &diff * &weights).sum() / wsum;
        self.push(Array2::from_elem((1, 1), loss), Op::Mse(a, target, weights, wsum))
    }

    /// Gradients of the scalar `loss` with respect to every parameter used,
    /// keyed by parameter id.
    pub fn backward(&self, loss: Var) -> HashMap<usize, Array2<f32>> {
        let mut grads: Vec<Option<Array2<f32>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Array2::ones(self.value(loss).raw_dim()));
        let mut out = HashMap::new();

        fn acc(grads: &mut [Option<Array2<f32>>], v: Var, g: Array2<f32>) {
            match &mut grads[v.0] {
                Some(x) => *x += &g,
                slot => *slot = Some(g),
            }
        }

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Const => {}
                Op::Param(id) => {
                    out.insert(*id, g);
                }
                Op::MatMul(a, b) => {
                    let ga = g.dot(&self.value(*b).t());
                    let gb = self.value(*a).t().dot(&g);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *b, g.clone());
                    acc(&mut grads, *a, g);
                }
                Op::AddRow(a, row) => {
                    acc(&mut grads, *row, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    acc(&mut grads, *a, g);
                }
                Op::Mul(a, b) => {
                    let ga = &g * self.value(*b);
                    let gb = &g * self.value(*a);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::MulRow(a, row) => {
                    let gr = (&g * self.value(*a)).sum_axis(Axis(0)).insert_axis(Axis(0));
                    let ga = &g * self.value(*row);
                    acc(&mut grads, *row, gr);
                    acc(&mut grads, *a, ga);
                }
                Op::Scale(a, k) => acc(&mut grads, *a, g * *k),
                Op::Relu(a) => {
                    let mask = self.value(*a).mapv(|x| if x > 0.0 { 1.0 } else { 0.0 });
                    acc(&mut grads, *a, g * mask);
                }
                Op::SoftmaxRows(a) => {
                    let y = &node.value;
                    let dot = (&g * y).sum_axis(Axis(1)).insert_axis(Axis(1));
                    acc(&mut grads, *a, y * &(g - &dot));
                }
                Op::LayerNorm(a, inv) => {
                    let y = &node.value;
                    let d = y.ncols() as f32;
                    let mean_g = g.sum_axis(Axis(1)).insert_axis(Axis(1)) / d;
                    let mean_gy = (&g * y).sum_axis(Axis(1)).insert_axis(Axis(1)) / d;
                    let mut gx = g - &mean_g - &(y * &mean_gy);
                    for (mut row, r) in gx.rows_mut().into_iter().zip(inv) {
                        row *= *r;
                    }
                    acc(&mut grads, *a, gx);
                }
                Op::Transpose(a) => acc(&mut grads, *a, g.t().to_owned()),
                Op::SliceCols(a, start) => {
                    let mut ga = Array2::zeros(self.value(*a).raw_dim());
                    ga.slice_mut(s![.., *start..*start + g.ncols()]).assign(&g);
                    acc(&mut grads, *a, ga);
                }
                Op::ConcatCols(parts) => {
                    let mut c = 0;
                    for p in parts {
                        let w = self.value(*p).ncols();
                        acc(&mut grads, *p, g.slice(s![.., c..c + w]).to_owned());
                        c += w;
                    }
                }
                Op::Mse(a, target, weights, wsum) => {
                    let k = 2.0 * g[(0, 0)] / wsum;
                    let ga = (self.value(*a) - target) * weights * k;
                    acc(&mut grads, *a, ga);
                }
            }
        }
        out
    }
}
