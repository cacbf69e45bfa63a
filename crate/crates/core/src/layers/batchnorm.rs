use super::dense::check_dnet;
use super::Mode;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const DEFAULT_MOMENTUM: f64 = 0.99;
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Per-feature batch normalization.
///
/// Train mode normalizes with the (biased) batch statistics and folds them
/// into the running estimates as `running = momentum * running + (1 - momentum) * batch`.
/// Eval mode uses the running estimates.
#[derive(Clone, Debug)]
pub struct BatchNormLayer {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub epsilon: f64,
    pub momentum: f64,
    pub grad_gamma: Vec<f64>,
    pub grad_beta: Vec<f64>,
    cache: Option<Cache>,
}

#[derive(Clone, Debug)]
struct Cache {
    normalized: Matrix,
    inv_std: Vec<f64>,
    mode: Mode,
}

impl BatchNormLayer {
    pub fn new(features: usize, momentum: f64, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&momentum) {
            return Err(Error::invalid(format!("batchnorm momentum {momentum} outside [0, 1]")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::invalid(format!("batchnorm epsilon {epsilon} must be > 0")));
        }
        Ok(Self {
            gamma: vec![1.0; features],
            beta: vec![0.0; features],
            running_mean: vec![0.0; features],
            running_var: vec![1.0; features],
            epsilon,
            momentum,
            grad_gamma: vec![0.0; features],
            grad_beta: vec![0.0; features],
            cache: None,
        })
    }

    pub fn features(&self) -> usize {
        self.gamma.len()
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.features() {
            return Err(Error::ShapeMismatch {
                op: "batchnorm_forward",
                left: x.shape(),
                right: (x.rows(), self.features()),
            });
        }
        Ok(())
    }

    fn normalize(&self, x: &Matrix, mean: &[f64], inv_std: &[f64]) -> Matrix {
        let mut out = x.clone();
        for r in 0..out.rows() {
            for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - mean[c]) * inv_std[c];
            }
        }
        out
    }

    fn scale_shift(&self, normalized: &Matrix) -> Matrix {
        let mut out = normalized.clone();
        for r in 0..out.rows() {
            for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = self.gamma[c] * *v + self.beta[c];
            }
        }
        out
    }

    fn running_inv_std(&self) -> Vec<f64> {
        self.running_var
            .iter()
            .map(|v| 1.0 / (v + self.epsilon).sqrt())
            .collect()
    }

    /// Eval-mode forward pass; never touches the running statistics.
    pub fn infer(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let normalized = self.normalize(x, &self.running_mean, &self.running_inv_std());
        Ok(self.scale_shift(&normalized))
    }

    pub fn forward(&mut self, x: &Matrix, mode: Mode) -> Result<Matrix> {
        self.check_input(x)?;
        let (mean, inv_std) = match mode {
            Mode::Train => {
                if x.rows() < 2 {
                    return Err(Error::invalid(
                        "batchnorm in train mode needs a batch of at least 2 samples",
                    ));
                }
                let mean = x.column_means();
                let var = x.column_variances();
                for c in 0..self.features() {
                    self.running_mean[c] = self.momentum * self.running_mean[c] + (1.0 - self.momentum) * mean[c];
                    self.running_var[c] = self.momentum * self.running_var[c] + (1.0 - self.momentum) * var[c];
                }
                let inv_std = var.iter().map(|v| 1.0 / (v + self.epsilon).sqrt()).collect();
                (mean, inv_std)
            }
            Mode::Eval => (self.running_mean.clone(), self.running_inv_std()),
        };
        let normalized = self.normalize(x, &mean, &inv_std);
        let out = self.scale_shift(&normalized);
        self.cache = Some(Cache {
            normalized,
            inv_std,
            mode,
        });
        Ok(out)
    }

    pub fn backward(&mut self, dout: &Matrix) -> Result<Matrix> {
        let cache = self
            .cache
            .as_ref()
            .ok_or(Error::BackwardBeforeForward { layer: "batchnorm" })?;
        let xhat = &cache.normalized;
        check_dnet(dout, xhat.rows(), self.features(), "batchnorm_backward")?;
        let n = xhat.rows() as f64;
        let f = self.features();

        let mut sum_dy = vec![0.0; f];
        let mut sum_dy_xhat = vec![0.0; f];
        for r in 0..xhat.rows() {
            for c in 0..f {
                let dy = dout.get(r, c);
                sum_dy[c] += dy;
                sum_dy_xhat[c] += dy * xhat.get(r, c);
            }
        }
        self.grad_beta = sum_dy.clone();
        self.grad_gamma = sum_dy_xhat.clone();

        let mut dx = Matrix::zeros(xhat.rows(), f);
        for r in 0..xhat.rows() {
            for c in 0..f {
                let scale = self.gamma[c] * cache.inv_std[c];
                let dy = dout.get(r, c);
                let v = match cache.mode {
                    Mode::Train => scale * (dy - sum_dy[c] / n - xhat.get(r, c) * sum_dy_xhat[c] / n),
                    Mode::Eval => scale * dy,
                };
                dx.set(r, c, v);
            }
        }
        Ok(dx)
    }
}
