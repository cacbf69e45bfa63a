use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Fully connected layer: `net = x W + b`, with `W` of shape `inputs × outputs`.
#[derive(Clone, Debug)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub grad_weights: Matrix,
    pub grad_bias: Vec<f64>,
    input: Option<Matrix>,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.cols() {
            return Err(Error::ShapeMismatch {
                op: "dense bias",
                left: weights.shape(),
                right: (1, bias.len()),
            });
        }
        Ok(Self {
            grad_weights: Matrix::zeros(weights.rows(), weights.cols()),
            grad_bias: vec![0.0; bias.len()],
            weights,
            bias,
            input: None,
        })
    }

    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }

    /// Forward pass without caching anything.
    pub fn infer(&self, x: &Matrix) -> Result<Matrix> {
        affine(x, &self.weights, &self.bias, "dense_forward")
    }

    pub fn forward(&mut self, x: &Matrix) -> Result<Matrix> {
        let net = self.infer(x)?;
        self.input = Some(x.clone());
        Ok(net)
    }

    /// Fills `grad_weights` and `grad_bias` from `dnet` without computing the
    /// input gradient.
    pub fn backward_params(&mut self, dnet: &Matrix) -> Result<()> {
        let x = self
            .input
            .as_ref()
            .ok_or(Error::BackwardBeforeForward { layer: "dense" })?;
        check_dnet(dnet, x.rows(), self.outputs(), "dense_backward")?;
        self.grad_weights = x.matmul_tn(dnet)?;
        self.grad_bias = dnet.column_sums();
        Ok(())
    }

    /// Fills the parameter gradients and returns `dx = dnet Wᵀ`.
    pub fn backward(&mut self, dnet: &Matrix) -> Result<Matrix> {
        self.backward_params(dnet)?;
        dnet.matmul_nt(&self.weights)
    }
}

pub(crate) fn affine(x: &Matrix, w: &Matrix, b: &[f64], op: &'static str) -> Result<Matrix> {
    if x.cols() != w.rows() {
        return Err(Error::ShapeMismatch {
            op,
            left: x.shape(),
            right: w.shape(),
        });
    }
    let mut net = x.matmul(w)?;
    net.add_row_broadcast(b)?;
    Ok(net)
}

pub(crate) fn check_dnet(dnet: &Matrix, rows: usize, cols: usize, op: &'static str) -> Result<()> {
    if dnet.shape() != (rows, cols) {
        return Err(Error::ShapeMismatch {
            op,
            left: dnet.shape(),
            right: (rows, cols),
        });
    }
    Ok(())
}
