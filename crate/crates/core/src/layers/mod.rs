//! Forward and backward passes for every layer kind, plus the losses.
//!
//! All layers use the batched row-major convention: a batch is a matrix
//! whose rows are samples. `forward` caches what `backward` needs; `infer`
//! is the side-effect-free eval-mode pass.

mod batchnorm;
mod dense;
mod dropout;
mod focus_layer;
mod loss;
mod relu;

pub use batchnorm::{BatchNormLayer, DEFAULT_EPSILON as BATCHNORM_EPSILON, DEFAULT_MOMENTUM as BATCHNORM_MOMENTUM};
pub use dense::DenseLayer;
pub use dropout::DropoutLayer;
pub use focus_layer::FocusLayer;
pub use loss::{mse, softmax, softmax_cross_entropy};
pub use relu::{relu, ReluLayer};

use crate::error::Result;
use crate::numerics::{Matrix, Rng};
use crate::optim::ParamGroup;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// A trainable tensor together with its current gradient.
pub struct ParamSlot<'a> {
    pub name: String,
    pub group: ParamGroup,
    pub values: &'a mut [f64],
    pub grads: &'a [f64],
}

#[derive(Clone, Debug)]
pub enum Layer {
    Dense(DenseLayer),
    Focus(FocusLayer),
    BatchNorm(BatchNormLayer),
    Dropout(DropoutLayer),
    Relu(ReluLayer),
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Dense(_) => "dense",
            Layer::Focus(_) => "focus",
            Layer::BatchNorm(_) => "batchnorm",
            Layer::Dropout(_) => "dropout",
            Layer::Relu(_) => "relu",
        }
    }

    pub fn forward(&mut self, x: &Matrix, mode: Mode, rng: &mut Rng) -> Result<Matrix> {
        match self {
            Layer::Dense(l) => l.forward(x),
            Layer::Focus(l) => l.forward(x),
            Layer::BatchNorm(l) => l.forward(x, mode),
            Layer::Dropout(l) => l.forward(x, mode, rng),
            Layer::Relu(l) => Ok(l.forward(x)),
        }
    }

    /// Eval-mode pass that leaves the layer untouched.
    pub fn infer(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            Layer::Dense(l) => l.infer(x),
            Layer::Focus(l) => l.infer(x),
            Layer::BatchNorm(l) => l.infer(x),
            Layer::Dropout(_) => Ok(x.clone()),
            Layer::Relu(_) => Ok(relu(x)),
        }
    }

    pub fn backward(&mut self, dout: &Matrix) -> Result<Matrix> {
        match self {
            Layer::Dense(l) => l.backward(dout),
            Layer::Focus(l) => l.backward(dout),
            Layer::BatchNorm(l) => l.backward(dout),
            Layer::Dropout(l) => l.backward(dout),
            Layer::Relu(l) => l.backward(dout),
        }
    }

    /// Like [`Layer::backward`] but skips the input gradient where that saves work.
    pub fn backward_params(&mut self, dout: &Matrix) -> Result<()> {
        match self {
            Layer::Dense(l) => l.backward_params(dout),
            Layer::Focus(l) => l.backward_params(dout),
            other => other.backward(dout).map(|_| ()),
        }
    }

    pub fn param_slots(&mut self, index: usize) -> Vec<ParamSlot<'_>> {
        let name = |p: &str| format!("layer{index}.{p}");
        match self {
            Layer::Dense(l) => vec![
                ParamSlot {
                    name: name("weights"),
                    group: ParamGroup::General,
                    values: l.weights.as_mut_slice(),
                    grads: l.grad_weights.as_slice(),
                },
                ParamSlot {
                    name: name("bias"),
                    group: ParamGroup::General,
                    values: &mut l.bias,
                    grads: &l.grad_bias,
                },
            ],
            Layer::Focus(l) => {
                let mut slots = vec![
                    ParamSlot {
                        name: name("weights"),
                        group: ParamGroup::General,
                        values: l.weights.as_mut_slice(),
                        grads: l.grad_weights.as_slice(),
                    },
                    ParamSlot {
                        name: name("bias"),
                        group: ParamGroup::General,
                        values: &mut l.bias,
                        grads: &l.grad_bias,
                    },
                ];
                if !l.frozen {
                    slots.push(ParamSlot {
                        name: name("mu"),
                        group: ParamGroup::FocusMu,
                        values: &mut l.focus.mu,
                        grads: &l.grad_mu,
                    });
                    slots.push(ParamSlot {
                        name: name("sigma"),
                        group: ParamGroup::FocusSigma,
                        values: &mut l.focus.sigma,
                        grads: &l.grad_sigma,
                    });
                }
                slots
            }
            Layer::BatchNorm(l) => vec![
                ParamSlot {
                    name: name("gamma"),
                    group: ParamGroup::General,
                    values: &mut l.gamma,
                    grads: &l.grad_gamma,
                },
                ParamSlot {
                    name: name("beta"),
                    group: ParamGroup::General,
                    values: &mut l.beta,
                    grads: &l.grad_beta,
                },
            ],
            Layer::Dropout(_) | Layer::Relu(_) => Vec::new(),
        }
    }
}
