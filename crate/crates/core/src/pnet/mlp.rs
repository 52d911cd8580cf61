//! Dense feed-forward network with batched forward and backward passes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
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

    #[inline]
    fn apply<T: Real>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    fn grad_from_output<T: Real>(self, y: T) -> T {
        match self {
            Activation::Relu => {
                if y > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => T::one() - y * y,
            Activation::Identity => T::one(),
        }
    }
}

/// Fully connected layer; `weights` is row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
    pub activation: Activation,
}

impl<T: Real> Dense<T> {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![T::zero(); inputs * outputs],
            bias: vec![T::zero(); outputs],
            activation,
        }
    }

    /// Uniform init: He bound for ReLU, Glorot bound otherwise. Zero bias.
    pub fn random<R: Rng + ?Sized>(
        inputs: usize,
        outputs: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let bound = match activation {
            Activation::Relu => (6.0 / inputs as f64).sqrt(),
            _ => (6.0 / (inputs + outputs) as f64).sqrt(),
        };
        let weights = (0..inputs * outputs)
            .map(|_| T::lit(rng.gen_range(-bound..bound)))
            .collect();
        Dense {
            inputs,
            outputs,
            weights,
            bias: vec![T::zero(); outputs],
            activation,
        }
    }

    fn row(&self, o: usize) -> &[T] {
        &self.weights[o * self.inputs..(o + 1) * self.inputs]
    }
}

#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] = acc[0] + a[k] * b[k];
        acc[1] = acc[1] + a[k + 1] * b[k + 1];
        acc[2] = acc[2] + a[k + 2] * b[k + 2];
        acc[3] = acc[3] + a[k + 3] * b[k + 3];
    }
    let mut tail = T::zero();
    for k in 4 * chunks..a.len() {
        tail = tail + a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// Parameter gradients with the same shapes as the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub weights: Vec<Vec<T>>,
    pub bias: Vec<Vec<T>>,
}

impl<T: Real> Gradients<T> {
    /// Gradient entry for flat parameter index `i` (see [`Mlp::param`]).
    pub fn flat(&self, mut i: usize) -> T {
        for (w, b) in self.weights.iter().zip(&self.bias) {
            if i < w.len() {
                return w[i];
            }
            i -= w.len();
            if i < b.len() {
                return b[i];
            }
            i -= b.len();
        }
        panic!("parameter index out of range");
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    pub layers: Vec<Dense<T>>,
}

impl<T: Real> Mlp<T> {
    /// Hidden layers use `hidden_activation`; the output layer is linear.
    pub fn random<R: Rng + ?Sized>(
        inputs: usize,
        hidden: &[usize],
        outputs: usize,
        hidden_activation: Activation,
        rng: &mut R,
    ) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut width = inputs;
        for &h in hidden {
            layers.push(Dense::random(width, h, hidden_activation, rng));
            width = h;
        }
        layers.push(Dense::random(width, outputs, Activation::Identity, rng));
        Mlp { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").outputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Mutable access to the flat parameter `i`; layer by layer, weights then bias.
    pub fn param(&mut self, mut i: usize) -> &mut T {
        for l in &mut self.layers {
            if i < l.weights.len() {
                return &mut l.weights[i];
            }
            i -= l.weights.len();
            if i < l.bias.len() {
                return &mut l.bias[i];
            }
            i -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    pub fn zero_gradients(&self) -> Gradients<T> {
        Gradients {
            weights: self.layers.iter().map(|l| vec![T::zero(); l.weights.len()]).collect(),
            bias: self.layers.iter().map(|l| vec![T::zero(); l.bias.len()]).collect(),
        }
    }

    /// Single-input forward pass.
    pub fn forward(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.input_dim(), "network input width");
        let mut x = input.to_vec();
        for l in &self.layers {
            x = (0..l.outputs)
                .map(|o| l.activation.apply(dot(l.row(o), &x) + l.bias[o]))
                .collect();
        }
        x
    }

    /// Row-major batch forward; returns the outputs of every layer, input first.
    pub fn forward_batch(&self, input: &[T], batch: usize) -> Vec<Vec<T>> {
        assert_eq!(input.len(), batch * self.input_dim(), "network input width");
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.to_vec());
        for l in &self.layers {
            let x = acts.last().expect("input present");
            let mut y = vec![T::zero(); batch * l.outputs];
            for s in 0..batch {
                let xs = &x[s * l.inputs..(s + 1) * l.inputs];
                let ys = &mut y[s * l.outputs..(s + 1) * l.outputs];
                for (o, yo) in ys.iter_mut().enumerate() {
                    *yo = l.activation.apply(dot(l.row(o), xs) + l.bias[o]);
                }
            }
            acts.push(y);
        }
        acts
    }

    /// Accumulates parameter gradients into `grads` given the loss gradient
    /// with respect to the network output.
    pub fn backward_batch(
        &self,
        acts: &[Vec<T>],
        d_output: &[T],
        batch: usize,
        grads: &mut Gradients<T>,
    ) {
        let mut delta = d_output.to_vec();
        for (li, l) in self.layers.iter().enumerate().rev() {
            let x = &acts[li];
            let y = &acts[li + 1];
            for (d, &yv) in delta.iter_mut().zip(y) {
                *d = *d * l.activation.grad_from_output(yv);
            }
            let gw = &mut grads.weights[li];
            let gb = &mut grads.bias[li];
            for s in 0..batch {
                let xs = &x[s * l.inputs..(s + 1) * l.inputs];
                let ds = &delta[s * l.outputs..(s + 1) * l.outputs];
                for (o, &d) in ds.iter().enumerate() {
                    if d != T::zero() {
                        axpy(d, xs, &mut gw[o * l.inputs..(o + 1) * l.inputs]);
                    }
                    gb[o] = gb[o] + d;
                }
            }
            if li == 0 {
                break;
            }
            let mut next = vec![T::zero(); batch * l.inputs];
            for s in 0..batch {
                let ds = &delta[s * l.outputs..(s + 1) * l.outputs];
                let ns = &mut next[s * l.inputs..(s + 1) * l.inputs];
                for (o, &d) in ds.iter().enumerate() {
                    if d != T::zero() {
                        axpy(d, l.row(o), ns);
                    }
                }
            }
            delta = next;
        }
    }
}
