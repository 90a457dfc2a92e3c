use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::nn::graph::{Graph, NodeId};
use crate::nn::kernels;
use crate::nn::params::{ParamId, ParameterSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub weight: ParamId,
    pub bias: ParamId,
    pub inputs: usize,
    pub outputs: usize,
}

/// Feed-forward network: affine layers with `tanh` between them and a
/// linear output layer. Parameters live in a shared [`ParameterSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

impl Mlp {
    /// Registers a network with layer widths `sizes` (input first) in
    /// `params`. Hidden weights use orthogonal init with `hidden_gain`, the
    /// last layer uses `head_gain`; biases start at zero.
    pub fn new<R: Rng + ?Sized>(
        params: &mut ParameterSet,
        name: &str,
        sizes: &[usize],
        hidden_gain: f64,
        head_gain: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Config(format!(
                "network `{name}` needs at least two non-zero widths, got {sizes:?}"
            )));
        }
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for (i, pair) in sizes.windows(2).enumerate() {
            let (inputs, outputs) = (pair[0], pair[1]);
            let gain = if i + 2 == sizes.len() { head_gain } else { hidden_gain };
            let w = orthogonal(outputs, inputs, gain, rng);
            let weight = params.add(format!("{name}.{i}.weight"), outputs, inputs, w)?;
            let bias = params.add(format!("{name}.{i}.bias"), 1, outputs, vec![0.0; outputs])?;
            layers.push(Layer {
                weight,
                bias,
                inputs,
                outputs,
            });
        }
        Ok(Self { layers })
    }

    /// Wraps already-registered layers.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network without layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::Config(format!(
                    "layer widths do not chain: {} -> {}",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    /// Records the forward pass of a `batch × input_width` node on the tape.
    pub fn forward(&self, g: &mut Graph, params: &ParameterSet, x: NodeId) -> Result<NodeId> {
        let (_, width) = g.shape(x);
        if width != self.input_width() {
            return Err(Error::Config(format!(
                "observation width {width} does not match network input {}",
                self.input_width()
            )));
        }
        let mut h = x;
        for (i, layer) in self.layers.iter().enumerate() {
            let w = g.param(params, layer.weight);
            let b = g.param(params, layer.bias);
            let z = g.matmul_t(h, w)?;
            h = g.add_row(z, b)?;
            if i + 1 < self.layers.len() {
                h = g.tanh(h);
            }
        }
        Ok(h)
    }

    /// Tape-free forward pass over `batch` rows of `x`.
    pub fn infer(&self, params: &ParameterSet, x: &[f64], batch: usize) -> Result<Vec<f64>> {
        if x.len() != batch * self.input_width() {
            return Err(Error::Config(format!(
                "expected {batch}x{} inputs, got {} values",
                self.input_width(),
                x.len()
            )));
        }
        let mut h = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = vec![0.0; batch * layer.outputs];
            kernels::matmul_t(
                &h,
                &params.get(layer.weight).value,
                batch,
                layer.inputs,
                layer.outputs,
                &mut out,
            );
            kernels::add_row(&mut out, &params.get(layer.bias).value);
            if i + 1 < self.layers.len() {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            h = out;
        }
        Ok(h)
    }
}

/// Orthogonal `rows×cols` matrix scaled by `gain`: rows (or columns, when
/// there are fewer) are orthonormal.
pub fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Vec<f64> {
    // Orthonormalise the columns of a tall Gaussian matrix, then transpose
    // back if the requested shape is wide.
    let (tall, short) = if rows >= cols { (rows, cols) } else { (cols, rows) };
    let mut q: Vec<Vec<f64>> = (0..short)
        .map(|_| (0..tall).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    for j in 0..short {
        for i in 0..j {
            let (head, tail) = q.split_at_mut(j);
            let dot: f64 = head[i].iter().zip(&tail[0]).map(|(a, b)| a * b).sum();
            for (v, u) in tail[0].iter_mut().zip(&head[i]) {
                *v -= dot * u;
            }
        }
        let norm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        q[j].iter_mut().for_each(|v| *v /= norm);
    }
    let mut out = vec![0.0; rows * cols];
    for (c, column) in q.iter().enumerate() {
        for (r, v) in column.iter().enumerate() {
            if rows >= cols {
                out[r * cols + c] = gain * v;
            } else {
                out[c * cols + r] = gain * v;
            }
        }
    }
    out
}
