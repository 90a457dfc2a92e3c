//! Reverse-mode automatic differentiation over row-major matrices.
//!
//! A [`Graph`] is a tape: every operation appends a node holding its value
//! and the ids of its inputs. [`Graph::backward`] walks the tape in reverse
//! and writes the gradient of a scalar node into the [`ParameterSet`] that
//! supplied the parameter leaves.
//!
//! The tape is rebuilt for every minibatch; nodes are never shared between
//! graphs.

use crate::error::{Error, Result};
use crate::nn::kernels;
use crate::nn::params::{ParamId, ParameterSet};

/// Index of a node inside one [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Constant,
    Param(ParamId),
    /// `x · wᵀ`, with `x: n×k` and `w: m×k`.
    MatMulT(NodeId, NodeId),
    /// Adds a `1×m` row to every row of an `n×m` matrix.
    AddRow(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    Tanh(NodeId),
    Exp(NodeId),
    Square(NodeId),
    Clamp(NodeId, f64, f64),
    Min(NodeId, NodeId),
    Max(NodeId, NodeId),
    LogSoftmax(NodeId),
    Gather(NodeId, Vec<usize>),
    SumRows(NodeId),
    Sum(NodeId),
    Mean(NodeId),
}

#[derive(Debug, Clone)]
struct Node {
    rows: usize,
    cols: usize,
    value: Vec<f64>,
    op: Op,
}

#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn shape(&self, id: NodeId) -> (usize, usize) {
        let n = &self.nodes[id.0];
        (n.rows, n.cols)
    }

    /// Value of a `1×1` node.
    pub fn scalar(&self, id: NodeId) -> f64 {
        self.nodes[id.0].value[0]
    }

    fn push(&mut self, rows: usize, cols: usize, value: Vec<f64>, op: Op) -> NodeId {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node {
            rows,
            cols,
            value,
            op,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn same_shape(&self, a: NodeId, b: NodeId, what: &str) -> Result<(usize, usize)> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(Error::Config(format!(
                "{what}: shape mismatch {}x{} vs {}x{}",
                sa.0, sa.1, sb.0, sb.1
            )));
        }
        Ok(sa)
    }

    pub fn constant(&mut self, rows: usize, cols: usize, value: Vec<f64>) -> Result<NodeId> {
        if value.len() != rows * cols {
            return Err(Error::Config(format!(
                "constant has {} values for shape {rows}x{cols}",
                value.len()
            )));
        }
        Ok(self.push(rows, cols, value, Op::Constant))
    }

    /// Leaf that reads a parameter; gradients flow back into it.
    pub fn param(&mut self, params: &ParameterSet, id: ParamId) -> NodeId {
        let p = params.get(id);
        self.push(p.rows, p.cols, p.value.clone(), Op::Param(id))
    }

    pub fn matmul_t(&mut self, x: NodeId, w: NodeId) -> Result<NodeId> {
        let (n, k) = self.shape(x);
        let (m, kw) = self.shape(w);
        if k != kw {
            return Err(Error::Config(format!(
                "matmul: input width {k} does not match weight width {kw}"
            )));
        }
        let mut out = vec![0.0; n * m];
        kernels::matmul_t(&self.nodes[x.0].value, &self.nodes[w.0].value, n, k, m, &mut out);
        Ok(self.push(n, m, out, Op::MatMulT(x, w)))
    }

    pub fn add_row(&mut self, x: NodeId, row: NodeId) -> Result<NodeId> {
        let (n, m) = self.shape(x);
        let (r, c) = self.shape(row);
        if r * c != m {
            return Err(Error::Config(format!(
                "add_row: row of {} values for width {m}",
                r * c
            )));
        }
        let mut out = self.nodes[x.0].value.clone();
        kernels::add_row(&mut out, &self.nodes[row.0].value);
        Ok(self.push(n, m, out, Op::AddRow(x, row)))
    }

    fn zip(&mut self, a: NodeId, b: NodeId, what: &str, f: impl Fn(f64, f64) -> f64, op: Op) -> Result<NodeId> {
        let (r, c) = self.same_shape(a, b, what)?;
        let out = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(&x, &y)| f(x, y))
            .collect();
        Ok(self.push(r, c, out, op))
    }

    fn map(&mut self, a: NodeId, f: impl Fn(f64) -> f64, op: Op) -> NodeId {
        let (r, c) = self.shape(a);
        let out = self.nodes[a.0].value.iter().map(|&x| f(x)).collect();
        self.push(r, c, out, op)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.zip(a, b, "add", |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.zip(a, b, "sub", |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.zip(a, b, "mul", |x, y| x * y, Op::Mul(a, b))
    }

    /// Element-wise minimum; ties send the gradient to `a`.
    pub fn min(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.zip(a, b, "min", f64::min, Op::Min(a, b))
    }

    /// Element-wise maximum; ties send the gradient to `a`.
    pub fn max(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.zip(a, b, "max", f64::max, Op::Max(a, b))
    }

    pub fn scale(&mut self, a: NodeId, factor: f64) -> NodeId {
        self.map(a, |x| x * factor, Op::Scale(a, factor))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.map(a, f64::tanh, Op::Tanh(a))
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        self.map(a, f64::exp, Op::Exp(a))
    }

    pub fn square(&mut self, a: NodeId) -> NodeId {
        self.map(a, |x| x * x, Op::Square(a))
    }

    pub fn clamp(&mut self, a: NodeId, lo: f64, hi: f64) -> NodeId {
        self.map(a, |x| x.clamp(lo, hi), Op::Clamp(a, lo, hi))
    }

    /// Row-wise log-softmax.
    pub fn log_softmax(&mut self, a: NodeId) -> NodeId {
        let (r, c) = self.shape(a);
        let mut out = self.nodes[a.0].value.clone();
        for row in out.chunks_mut(c) {
            kernels::log_softmax_in_place(row);
        }
        self.push(r, c, out, Op::LogSoftmax(a))
    }

    /// Picks column `index[i]` of row `i`, producing an `n×1` column.
    pub fn gather(&mut self, a: NodeId, index: &[usize]) -> Result<NodeId> {
        let (r, c) = self.shape(a);
        if index.len() != r {
            return Err(Error::Config(format!(
                "gather: {} indices for {r} rows",
                index.len()
            )));
        }
        if let Some(&bad) = index.iter().find(|&&j| j >= c) {
            return Err(Error::Config(format!("gather: index {bad} out of {c} columns")));
        }
        let v = &self.nodes[a.0].value;
        let out = index.iter().enumerate().map(|(i, &j)| v[i * c + j]).collect();
        Ok(self.push(r, 1, out, Op::Gather(a, index.to_vec())))
    }

    /// Row sums, producing an `n×1` column.
    pub fn sum_rows(&mut self, a: NodeId) -> NodeId {
        let (r, c) = self.shape(a);
        let out = self.nodes[a.0].value.chunks(c).map(|row| row.iter().sum()).collect();
        self.push(r, 1, out, Op::SumRows(a))
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let s = self.nodes[a.0].value.iter().sum();
        self.push(1, 1, vec![s], Op::Sum(a))
    }

    pub fn mean(&mut self, a: NodeId) -> NodeId {
        let v = &self.nodes[a.0].value;
        let m = v.iter().sum::<f64>() / v.len().max(1) as f64;
        self.push(1, 1, vec![m], Op::Mean(a))
    }

    /// Writes `∂loss/∂θ` into `params`. Every parameter gradient is reset
    /// first, so parameters the loss does not reach end up with zeros.
    pub fn backward(&self, loss: NodeId, params: &mut ParameterSet) -> Result<()> {
        if loss.0 >= self.nodes.len() {
            return Err(Error::Usage(
                "backward called on a node that no forward pass produced".into(),
            ));
        }
        if self.shape(loss) != (1, 1) {
            let (r, c) = self.shape(loss);
            return Err(Error::Usage(format!("backward needs a scalar loss, got {r}x{c}")));
        }
        params.zero_grad();

        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Constant => {}
                Op::Param(pid) => {
                    let p = params.get_mut(*pid);
                    for (dst, src) in p.grad.iter_mut().zip(&g) {
                        *dst += src;
                    }
                }
                Op::MatMulT(x, w) => {
                    let (n, k) = self.shape(*x);
                    let m = node.cols;
                    let mut dx = vec![0.0; n * k];
                    kernels::matmul(&g, &self.nodes[w.0].value, n, m, k, &mut dx);
                    let mut dw = vec![0.0; m * k];
                    kernels::matmul_tn(&g, &self.nodes[x.0].value, n, m, k, &mut dw);
                    accumulate(&mut grads, *x, dx);
                    accumulate(&mut grads, *w, dw);
                }
                Op::AddRow(x, row) => {
                    let m = node.cols;
                    let mut drow = vec![0.0; m];
                    for r in g.chunks(m) {
                        for (d, v) in drow.iter_mut().zip(r) {
                            *d += v;
                        }
                    }
                    accumulate(&mut grads, *row, drow);
                    accumulate(&mut grads, *x, g);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *b, g.clone());
                    accumulate(&mut grads, *a, g);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut grads, *b, g.iter().map(|v| -v).collect());
                    accumulate(&mut grads, *a, g);
                }
                Op::Mul(a, b) => {
                    let va = &self.nodes[a.0].value;
                    let vb = &self.nodes[b.0].value;
                    let da = g.iter().zip(vb).map(|(g, y)| g * y).collect();
                    let db = g.iter().zip(va).map(|(g, x)| g * x).collect();
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::Scale(a, f) => {
                    accumulate(&mut grads, *a, g.iter().map(|v| v * f).collect());
                }
                Op::Tanh(a) => {
                    let d = g
                        .iter()
                        .zip(&node.value)
                        .map(|(g, y)| g * (1.0 - y * y))
                        .collect();
                    accumulate(&mut grads, *a, d);
                }
                Op::Exp(a) => {
                    let d = g.iter().zip(&node.value).map(|(g, y)| g * y).collect();
                    accumulate(&mut grads, *a, d);
                }
                Op::Square(a) => {
                    let va = &self.nodes[a.0].value;
                    let d = g.iter().zip(va).map(|(g, x)| 2.0 * g * x).collect();
                    accumulate(&mut grads, *a, d);
                }
                Op::Clamp(a, lo, hi) => {
                    let va = &self.nodes[a.0].value;
                    let d = g
                        .iter()
                        .zip(va)
                        .map(|(g, x)| if *x >= *lo && *x <= *hi { *g } else { 0.0 })
                        .collect();
                    accumulate(&mut grads, *a, d);
                }
                Op::Min(a, b) | Op::Max(a, b) => {
                    let is_min = matches!(node.op, Op::Min(..));
                    let va = &self.nodes[a.0].value;
                    let vb = &self.nodes[b.0].value;
                    let mut da = vec![0.0; g.len()];
                    let mut db = vec![0.0; g.len()];
                    for i in 0..g.len() {
                        let pick_a = if is_min { va[i] <= vb[i] } else { va[i] >= vb[i] };
                        if pick_a {
                            da[i] = g[i];
                        } else {
                            db[i] = g[i];
                        }
                    }
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::LogSoftmax(a) => {
                    let c = node.cols;
                    let mut d = vec![0.0; g.len()];
                    for ((dr, gr), yr) in d.chunks_mut(c).zip(g.chunks(c)).zip(node.value.chunks(c)) {
                        let total: f64 = gr.iter().sum();
                        for j in 0..c {
                            dr[j] = gr[j] - yr[j].exp() * total;
                        }
                    }
                    accumulate(&mut grads, *a, d);
                }
                Op::Gather(a, index) => {
                    let (r, c) = self.shape(*a);
                    let mut d = vec![0.0; r * c];
                    for (i, &j) in index.iter().enumerate() {
                        d[i * c + j] = g[i];
                    }
                    accumulate(&mut grads, *a, d);
                }
                Op::SumRows(a) => {
                    let c = self.shape(*a).1;
                    let d = g.iter().flat_map(|&v| std::iter::repeat_n(v, c)).collect();
                    accumulate(&mut grads, *a, d);
                }
                Op::Sum(a) => {
                    let n = self.nodes[a.0].value.len();
                    accumulate(&mut grads, *a, vec![g[0]; n]);
                }
                Op::Mean(a) => {
                    let n = self.nodes[a.0].value.len();
                    accumulate(&mut grads, *a, vec![g[0] / n.max(1) as f64; n]);
                }
            }
        }
        Ok(())
    }
}

fn accumulate(grads: &mut [Option<Vec<f64>>], id: NodeId, g: Vec<f64>) {
    match &mut grads[id.0] {
        Some(existing) => {
            for (e, v) in existing.iter_mut().zip(&g) {
                *e += v;
            }
        }
        slot @ None => *slot = Some(g),
    }
}
