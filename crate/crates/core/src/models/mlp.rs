use serde::{Deserialize, Serialize};

use super::{check_input_width, Model, TrainConfig};
use crate::error::{Error, Result};
use crate::numerics::{dot, sigmoid, Matrix, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Identity,
    Sigmoid,
}

/// One affine layer; `weights` is `out x in`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Uniform in `+-sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn glorot(inputs: usize, outputs: usize, rng: &mut Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..inputs * outputs)
            .map(|_| (2.0 * rng.uniform() - 1.0) * limit)
            .collect();
        Self {
            inputs,
            outputs,
            weights,
            bias: vec![0.0; outputs],
        }
    }

    #[inline]
    fn weight_row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.inputs..(o + 1) * self.inputs]
    }

    fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.outputs).map(|o| dot(self.weight_row(o), input) + self.bias[o]));
    }

    pub fn frobenius_norm(&self) -> f64 {
        dot(&self.weights, &self.weights).sqrt()
    }
}

/// Fully connected network with rectifier hidden units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub output: OutputActivation,
}

struct Trace {
    // pre-activations per layer; activations[0] is the input
    pre: Vec<Vec<f64>>,
    activations: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn new(layers: Vec<Layer>, output: OutputActivation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter("network needs at least one layer".into()));
        }
        for w in layers.windows(2) {
            if w[0].outputs != w[1].inputs {
                return Err(Error::DimensionMismatch {
                    expected: w[0].outputs,
                    actual: w[1].inputs,
                    context: "layer widths",
                });
            }
        }
        for l in &layers {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::DimensionMismatch {
                    expected: l.inputs * l.outputs,
                    actual: l.weights.len(),
                    context: "layer parameters",
                });
            }
        }
        if layers.last().map(|l| l.outputs) != Some(1) {
            return Err(Error::InvalidParameter("network must have a single output".into()));
        }
        Ok(Self { layers, output })
    }

    /// Freshly initialized network with the given widths (`d, ..., 1`).
    pub fn init(widths: &[usize], output: OutputActivation, rng: &Rng) -> Result<Self> {
        if widths.len() < 2 || widths[widths.len() - 1] != 1 || widths.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "widths must run from the input dimension down to 1, got {widths:?}"
            )));
        }
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(l, w)| Layer::glorot(w[0], w[1], &mut rng.derive(l as u64)))
            .collect();
        Self::new(layers, output)
    }

    pub fn zeros(widths: &[usize], output: OutputActivation) -> Result<Self> {
        let layers = widths.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Self::new(layers, output)
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].inputs];
        w.extend(self.layers.iter().map(|l| l.outputs));
        w
    }

    /// Product of per-layer Frobenius norms, times 1/4 for a sigmoid output.
    ///
    /// An upper bound on the global Lipschitz constant (rectifiers are
    /// 1-Lipschitz and the spectral norm never exceeds the Frobenius norm);
    /// usually far from tight.
    pub fn frobenius_product(&self) -> f64 {
        let prod: f64 = self.layers.iter().map(Layer::frobenius_norm).product();
        match self.output {
            OutputActivation::Identity => prod,
            OutputActivation::Sigmoid => prod / 4.0,
        }
    }

    fn activate_output(&self, z: f64) -> f64 {
        match self.output {
            OutputActivation::Identity => z,
            OutputActivation::Sigmoid => sigmoid(z),
        }
    }

    fn forward_scalar(&self, x: &[f64], a: &mut Vec<f64>, b: &mut Vec<f64>) -> f64 {
        a.clear();
        a.extend_from_slice(x);
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            layer.forward_into(a, b);
            if l < last {
                b.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(a, b);
        }
        self.activate_output(a[0])
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut activations = vec![x.to_vec()];
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.forward_into(activations.last().unwrap(), &mut z);
            let a = if l < last {
                z.iter().map(|v| v.max(0.0)).collect()
            } else {
                vec![self.activate_output(z[0])]
            };
            pre.push(z);
            activations.push(a);
        }
        Trace { pre, activations }
    }

    /// Backpropagate `d(output)/d(pre-activation of the last layer) = seed`.
    /// Returns the gradient w.r.t. the input and accumulates parameter
    /// gradients into `grads` when given.
    fn backward(&self, trace: &Trace, seed: f64, mut grads: Option<&mut [Layer]>) -> Vec<f64> {
        let mut delta = vec![seed];
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &trace.activations[l];
            if let Some(g) = grads.as_deref_mut() {
                let gl = &mut g[l];
                for o in 0..layer.outputs {
                    let dz = delta[o];
                    if dz == 0.0 {
                        continue;
                    }
                    gl.bias[o] += dz;
                    let row = &mut gl.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (w, x) in row.iter_mut().zip(input) {
                        *w += dz * x;
                    }
                }
            }
            let mut prev = vec![0.0; layer.inputs];
            for o in 0..layer.outputs {
                let dz = delta[o];
                if dz == 0.0 {
                    continue;
                }
                for (p, w) in prev.iter_mut().zip(layer.weight_row(o)) {
                    *p += dz * w;
                }
            }
            if l > 0 {
                for (p, z) in prev.iter_mut().zip(&trace.pre[l - 1]) {
                    if *z <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
            delta = prev;
        }
        delta
    }

    fn output_slope(&self, trace: &Trace) -> f64 {
        match self.output {
            OutputActivation::Identity => 1.0,
            OutputActivation::Sigmoid => {
                let s = trace.activations.last().unwrap()[0];
                s * (1.0 - s)
            }
        }
    }
}

impl Model for MlpModel {
    fn dim(&self) -> usize {
        self.layers[0].inputs
    }

    fn predict_batch(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        check_input_width(self.dim(), inputs.cols())?;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        Ok((0..inputs.rows())
            .map(|i| self.forward_scalar(inputs.row(i), &mut a, &mut b))
            .collect())
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        check_input_width(self.dim(), x.len())?;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        Ok(self.forward_scalar(x, &mut a, &mut b))
    }

    fn input_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let trace = self.trace(x);
        let seed = self.output_slope(&trace);
        Some(self.backward(&trace, seed, None))
    }

    fn layers(&self) -> Vec<Vec<f64>> {
        self.layers
            .iter()
            .map(|l| {
                let mut v = l.weights.clone();
                v.extend_from_slice(&l.bias);
                v
            })
            .collect()
    }

    fn lipschitz_constant(&self) -> Option<f64> {
        Some(self.frobenius_product())
    }

    fn output_bound(&self) -> Option<f64> {
        match self.output {
            OutputActivation::Sigmoid => Some(1.0),
            OutputActivation::Identity => None,
        }
    }
}

fn mlp_loss(m: &MlpModel, data: &Matrix, labels: &[f64]) -> f64 {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let mut total = 0.0;
    for i in 0..data.rows() {
        let p = m.forward_scalar(data.row(i), &mut a, &mut b);
        total += match m.output {
            OutputActivation::Sigmoid => {
                let p = p.clamp(1e-15, 1.0 - 1e-15);
                -(labels[i] * p.ln() + (1.0 - labels[i]) * (1.0 - p).ln())
            }
            OutputActivation::Identity => 0.5 * (p - labels[i]).powi(2),
        };
    }
    total / data.rows() as f64
}

/// Mini-batch gradient descent with manual backpropagation.
///
/// Loss is cross-entropy for a sigmoid output and squared error otherwise,
/// plus `weight_decay` times the squared Frobenius norm of every weight
/// matrix (biases are not penalized). Deterministic given `cfg.seed()`.
pub fn train_mlp(
    data: &Matrix,
    labels: &[f64],
    widths: &[usize],
    output: OutputActivation,
    cfg: &TrainConfig,
) -> Result<MlpModel> {
    let n = data.rows();
    if n == 0 {
        return Err(Error::NoData);
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: labels.len(),
            context: "labels",
        });
    }
    if widths.first() != Some(&data.cols()) {
        return Err(Error::DimensionMismatch {
            expected: data.cols(),
            actual: widths.first().copied().unwrap_or(0),
            context: "input width",
        });
    }
    let base = Rng::new(cfg.seed(), 0);
    let mut model = MlpModel::init(widths, output, &base.derive(0))?;
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffler = base.derive(1);
    let lr = cfg.learning_rate();
    let decay = cfg.weight_decay();

    for epoch in 0..cfg.epochs() {
        shuffler.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size()) {
            let mut grads: Vec<Layer> = model
                .layers
                .iter()
                .map(|l| Layer::zeros(l.inputs, l.outputs))
                .collect();
            for &i in batch {
                let trace = model.trace(data.row(i));
                let p = trace.activations.last().unwrap()[0];
                // both losses have d(loss)/d(pre-activation) = p - y
                model.backward(&trace, p - labels[i], Some(&mut grads));
            }
            let scale = 1.0 / batch.len() as f64;
            for (layer, g) in model.layers.iter_mut().zip(&grads) {
                for (w, gw) in layer.weights.iter_mut().zip(&g.weights) {
                    *w -= lr * (gw * scale + 2.0 * decay * *w);
                }
                for (b, gb) in layer.bias.iter_mut().zip(&g.bias) {
                    *b -= lr * gb * scale;
                }
            }
        }
        if !mlp_loss(&model, data, labels).is_finite() {
            return Err(Error::Divergence { epoch });
        }
    }
    Ok(model)
}

/// Re-draw the last `depth` layers (output side first) from the default
/// initialization; the remaining layers are untouched.
pub fn randomize_cascading(m: &MlpModel, depth: usize, rng: &Rng) -> Result<MlpModel> {
    let total = m.layers.len();
    if depth > total {
        return Err(Error::InvalidParameter(format!(
            "randomization depth {depth} exceeds the {total} layers"
        )));
    }
    let mut out = m.clone();
    for k in 0..depth {
        let l = total - 1 - k;
        let layer = &m.layers[l];
        out.layers[l] = Layer::glorot(layer.inputs, layer.outputs, &mut rng.derive(l as u64));
    }
    Ok(out)
}
