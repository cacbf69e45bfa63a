use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Targets};
use crate::error::{Error, Result};
use crate::focus::ScalerGradient;
use crate::init::{init_dense_layer, init_focus_layer, InitSpec};
use crate::layers::{
    mse, softmax_cross_entropy, BatchNormLayer, DropoutLayer, FocusLayer, Layer, Mode, ParamSlot, ReluLayer,
    BATCHNORM_EPSILON, BATCHNORM_MOMENTUM,
};
use crate::numerics::{Matrix, Rng};
use crate::optim::ClipBounds;

fn bn_momentum() -> f64 {
    BATCHNORM_MOMENTUM
}

fn bn_epsilon() -> f64 {
    BATCHNORM_EPSILON
}

/// One layer descriptor. `inputs`, when given, is checked against the width
/// produced by the previous layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LayerSpec {
    Dense {
        units: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inputs: Option<usize>,
    },
    Focus {
        units: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inputs: Option<usize>,
        #[serde(default)]
        init: InitSpec,
        /// Keep `mu` and `sigma` at their initial values.
        #[serde(default)]
        frozen: bool,
    },
    BatchNorm {
        #[serde(default = "bn_momentum")]
        momentum: f64,
        #[serde(default = "bn_epsilon")]
        epsilon: f64,
    },
    Dropout {
        rate: f64,
    },
    Relu,
}

impl LayerSpec {
    pub fn batch_norm() -> Self {
        LayerSpec::BatchNorm {
            momentum: BATCHNORM_MOMENTUM,
            epsilon: BATCHNORM_EPSILON,
        }
    }

    fn is_affine(&self) -> bool {
        matches!(self, LayerSpec::Dense { .. } | LayerSpec::Focus { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub inputs: usize,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// Width after every layer, checking the chain on the way.
    pub fn widths(&self) -> Result<Vec<usize>> {
        if self.inputs == 0 {
            return Err(Error::invalid("network needs at least one input"));
        }
        let mut width = self.inputs;
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                LayerSpec::Dense { units, inputs } | LayerSpec::Focus { units, inputs, .. } => {
                    if let Some(declared) = inputs {
                        if *declared != width {
                            return Err(Error::invalid(format!(
                                "layer {i} declares {declared} inputs but receives {width}"
                            )));
                        }
                    }
                    if *units == 0 {
                        return Err(Error::invalid(format!("layer {i} has zero units")));
                    }
                    width = *units;
                }
                LayerSpec::Dropout { rate } => {
                    if !(0.0..1.0).contains(rate) {
                        return Err(Error::invalid(format!("layer {i}: dropout rate {rate} outside [0, 1)")));
                    }
                }
                LayerSpec::BatchNorm { .. } | LayerSpec::Relu => {}
            }
            out.push(width);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.widths()?;
        match self.layers.last() {
            Some(l) if l.is_affine() => Ok(()),
            _ => Err(Error::invalid("the last layer must be the dense or focus output layer")),
        }
    }

    pub fn outputs(&self) -> Result<usize> {
        self.validate()?;
        Ok(*self.widths()?.last().expect("validated non-empty"))
    }

    pub fn has_focus(&self) -> bool {
        self.layers.iter().any(|l| matches!(l, LayerSpec::Focus { .. }))
    }

    /// Hidden block `affine - batchnorm - relu - dropout` repeated per width,
    /// then a dense output. `hidden` chooses the affine kind for each block.
    pub fn mlp(inputs: usize, hidden: &[(usize, Option<&InitSpec>, f64)], outputs: usize, frozen: bool) -> Self {
        let mut layers = Vec::new();
        for &(units, init, dropout) in hidden {
            layers.push(match init {
                Some(init) => LayerSpec::Focus {
                    units,
                    inputs: None,
                    init: init.clone(),
                    frozen,
                },
                None => LayerSpec::Dense { units, inputs: None },
            });
            layers.push(LayerSpec::batch_norm());
            layers.push(LayerSpec::Relu);
            if dropout > 0.0 {
                layers.push(LayerSpec::Dropout { rate: dropout });
            }
        }
        layers.push(LayerSpec::Dense {
            units: outputs,
            inputs: None,
        });
        Self { inputs, layers }
    }
}

/// Loss value and the gradient of the mean loss with respect to the outputs.
pub fn loss_and_grad(outputs: &Matrix, targets: &Targets) -> Result<(f64, Matrix)> {
    match targets {
        Targets::Classes { labels, .. } => softmax_cross_entropy(outputs, labels),
        Targets::Values(v) => mse(outputs, &Matrix::column_vector(v)),
    }
}

#[derive(Clone, Debug)]
pub struct Network {
    pub spec: NetworkSpec,
    pub layers: Vec<Layer>,
}

impl Network {
    /// Builds and initializes every layer, drawing from `rng` in layer order.
    pub fn build(spec: &NetworkSpec, clip: &ClipBounds, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        let mut width = spec.inputs;
        let mut layers = Vec::with_capacity(spec.layers.len());
        for layer in &spec.layers {
            layers.push(match layer {
                LayerSpec::Dense { units, .. } => {
                    let l = init_dense_layer(width, *units, rng)?;
                    width = *units;
                    Layer::Dense(l)
                }
                LayerSpec::Focus {
                    units, init, frozen, ..
                } => {
                    init.validate(clip)?;
                    let mut l = init_focus_layer(width, *units, init, clip, rng)?;
                    l.frozen = *frozen;
                    width = *units;
                    Layer::Focus(l)
                }
                LayerSpec::BatchNorm { momentum, epsilon } => {
                    Layer::BatchNorm(BatchNormLayer::new(width, *momentum, *epsilon)?)
                }
                LayerSpec::Dropout { rate } => Layer::Dropout(DropoutLayer::new(*rate)?),
                LayerSpec::Relu => Layer::Relu(ReluLayer::new()),
            });
        }
        Ok(Self {
            spec: spec.clone(),
            layers,
        })
    }

    pub fn inputs(&self) -> usize {
        self.spec.inputs
    }

    pub fn forward(&mut self, x: &Matrix, mode: Mode, rng: &mut Rng) -> Result<Matrix> {
        if x.cols() != self.inputs() {
            return Err(Error::ShapeMismatch {
                op: "network_forward",
                left: x.shape(),
                right: (x.rows(), self.inputs()),
            });
        }
        let mut h = x.clone();
        for layer in &mut self.layers {
            h = layer.forward(&h, mode, rng)?;
        }
        Ok(h)
    }

    /// Eval-mode outputs; parameters and running statistics stay untouched.
    pub fn infer(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.inputs() {
            return Err(Error::ShapeMismatch {
                op: "network_infer",
                left: x.shape(),
                right: (x.rows(), self.inputs()),
            });
        }
        let mut h = x.clone();
        for layer in &self.layers {
            h = layer.infer(&h)?;
        }
        Ok(h)
    }

    /// Fills parameter gradients. The first layer skips its input gradient.
    pub fn backward(&mut self, dout: &Matrix) -> Result<()> {
        let mut g = dout.clone();
        for (i, layer) in self.layers.iter_mut().enumerate().rev() {
            if i == 0 {
                layer.backward_params(&g)?;
            } else {
                g = layer.backward(&g)?;
            }
        }
        Ok(())
    }

    /// Like [`Network::backward`] but also returns the input gradient.
    pub fn backward_input(&mut self, dout: &Matrix) -> Result<Matrix> {
        let mut g = dout.clone();
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        Ok(g)
    }

    pub fn param_slots(&mut self) -> Vec<ParamSlot<'_>> {
        self.layers
            .iter_mut()
            .enumerate()
            .flat_map(|(i, l)| l.param_slots(i))
            .collect()
    }

    pub fn num_parameters(&mut self) -> usize {
        self.param_slots().iter().map(|s| s.values.len()).sum()
    }

    pub fn focus_layers(&self) -> impl Iterator<Item = (usize, &FocusLayer)> {
        self.layers.iter().enumerate().filter_map(|(i, l)| match l {
            Layer::Focus(f) => Some((i, f)),
            _ => None,
        })
    }

    pub fn focus_layers_mut(&mut self) -> impl Iterator<Item = &mut FocusLayer> {
        self.layers.iter_mut().filter_map(|l| match l {
            Layer::Focus(f) => Some(f),
            _ => None,
        })
    }

    pub fn set_scaler_gradient(&mut self, mode: ScalerGradient) {
        for f in self.focus_layers_mut() {
            f.scaler_gradient = mode;
        }
    }

    pub fn clip_focus(&mut self, bounds: &ClipBounds) {
        for f in self.focus_layers_mut() {
            crate::optim::clip_focus(&mut f.focus, bounds);
        }
    }

    /// Mean training loss on a batch, with gradients filled in.
    pub fn loss_and_backward(&mut self, x: &Matrix, targets: &Targets, mode: Mode, rng: &mut Rng) -> Result<f64> {
        let out = self.forward(x, mode, rng)?;
        let (loss, dout) = loss_and_grad(&out, targets)?;
        self.backward(&dout)?;
        Ok(loss)
    }

    /// Predicted class per row.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.infer(x)?.argmax_rows())
    }

    pub fn check_dataset(&self, ds: &Dataset) -> Result<()> {
        if ds.num_features() != self.inputs() {
            return Err(Error::invalid(format!(
                "dataset has {} features but the network expects {}",
                ds.num_features(),
                self.inputs()
            )));
        }
        let outputs = self.spec.outputs()?;
        match &ds.targets {
            Targets::Classes { classes, .. } if *classes > outputs => Err(Error::invalid(format!(
                "dataset has {classes} classes but the network has {outputs} outputs"
            ))),
            Targets::Values(_) if outputs != 1 => Err(Error::invalid(format!(
                "regression needs a single output, network has {outputs}"
            ))),
            _ => Ok(()),
        }
    }
}
