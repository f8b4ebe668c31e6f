use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output `y`.
    fn derivative_at_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Identity => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// `y = act(x · W + b)` for row-major batches `x` of shape `(batch, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// Shape `(in, out)`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        DenseLayer {
            weights: Array2::zeros((input, output)),
            bias: Array1::zeros(output),
            activation,
        }
    }

    /// Uniform fan-in initialization: limit `sqrt(6/fan_in)` for relu layers,
    /// `sqrt(3/fan_in)` otherwise. Biases start at zero.
    pub fn init<R: Rng + ?Sized>(
        input: usize,
        output: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let gain = if activation == Activation::Relu { 6.0 } else { 3.0 };
        let limit = (gain / input as f64).sqrt();
        let weights = Array2::from_shape_simple_fn((input, output), || {
            rng.random_range(-limit..limit)
        });
        DenseLayer {
            weights,
            bias: Array1::zeros(output),
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }

    fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.weights);
        z += &self.bias;
        let act = self.activation;
        z.mapv_inplace(|v| act.apply(v));
        z
    }
}

/// Per-layer `(dW, db)` matching a network's layer order.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGrads {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl NetworkGrads {
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for (w, b) in &self.layers {
            out.extend(w.iter());
            out.extend(b.iter());
        }
    }
}

/// Layer inputs and outputs recorded during a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `activations[0]` is the input, `activations[i + 1]` the output of layer `i`.
    pub activations: Vec<Array2<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("trace holds at least the input")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    layers: Vec<DenseLayer>,
}

impl DenseNetwork {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::Shape {
                    context: "layer chaining",
                    expected: pair[0].output_dim(),
                    got: pair[1].input_dim(),
                });
            }
        }
        for l in &layers {
            if l.bias.len() != l.output_dim() {
                return Err(Error::Shape {
                    context: "bias length",
                    expected: l.output_dim(),
                    got: l.bias.len(),
                });
            }
            if l.weights.iter().chain(l.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Numeric("network parameters must be finite".into()));
            }
        }
        Ok(DenseNetwork { layers })
    }

    /// Builds `dims[0] -> dims[1] -> … -> dims[n]` with `hidden` activations
    /// on every layer but the last, which uses `output`.
    pub fn init<R: Rng + ?Sized>(
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Config(format!("invalid layer widths {dims:?}")));
        }
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output } else { hidden };
                DenseLayer::init(dims[i], dims[i + 1], act, rng)
            })
            .collect();
        DenseNetwork::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape {
                context: "network input",
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut h = self.layers[0].forward(x);
        for layer in &self.layers[1..] {
            h = layer.forward(h.view());
        }
        Ok(h)
    }

    pub fn forward_trace(&self, x: ArrayView2<f64>) -> Result<ForwardTrace> {
        self.check_input(&x)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_owned());
        for layer in &self.layers {
            let next = layer.forward(activations.last().expect("non-empty").view());
            activations.push(next);
        }
        Ok(ForwardTrace { activations })
    }

    /// Reverse pass. `grad_output` is dL/d(output); returns dL/d(input) and
    /// the parameter gradients.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        grad_output: Array2<f64>,
    ) -> (Array2<f64>, NetworkGrads) {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = grad_output;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let act = layer.activation;
            g.zip_mut_with(&trace.activations[i + 1], |gi, &y| {
                *gi *= act.derivative_at_output(y)
            });
            let dw = trace.activations[i].t().dot(&g);
            let db = g.sum_axis(Axis(0));
            g = g.dot(&layer.weights.t());
            grads.push((dw, db));
        }
        grads.reverse();
        (g, NetworkGrads { layers: grads })
    }

    /// Parameters in checkpoint order: per layer, weights row-major then bias.
    pub fn flatten_params_into(&self, out: &mut Vec<f64>) {
        for l in &self.layers {
            out.extend(l.weights.iter());
            out.extend(l.bias.iter());
        }
    }

    /// Loads parameters from `flat` in [`Self::flatten_params_into`] order and
    /// returns how many values were consumed.
    pub fn load_params(&mut self, flat: &[f64]) -> Result<usize> {
        let need = self.num_params();
        if flat.len() < need {
            return Err(Error::Shape {
                context: "parameter buffer",
                expected: need,
                got: flat.len(),
            });
        }
        let mut pos = 0;
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = flat[pos];
                pos += 1;
            }
            for b in l.bias.iter_mut() {
                *b = flat[pos];
                pos += 1;
            }
        }
        Ok(pos)
    }
}
