use super::dense::{affine, check_dnet};
use crate::error::{Error, Result};
use crate::focus::{focus_coefficients, focus_gradients_with, FocusCoefficients, FocusParams, ScalerGradient};
use crate::numerics::Matrix;

/// Layer of focusing neurons.
///
/// The forward pass is a dense layer over the effective weights `Φ ⊙ W`,
/// where `Φ` (`inputs × outputs`) comes from [`focus_coefficients`].
#[derive(Clone, Debug)]
pub struct FocusLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub focus: FocusParams,
    /// Frozen layers keep `mu` and `sigma` fixed during training.
    pub frozen: bool,
    pub scaler_gradient: ScalerGradient,
    pub grad_weights: Matrix,
    pub grad_bias: Vec<f64>,
    pub grad_mu: Vec<f64>,
    pub grad_sigma: Vec<f64>,
    cache: Option<Cache>,
}

#[derive(Clone, Debug)]
struct Cache {
    input: Matrix,
    coeffs: FocusCoefficients,
    effective: Matrix,
}

impl FocusLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, focus: FocusParams) -> Result<Self> {
        focus.validate()?;
        if focus.inputs != weights.rows() || focus.neurons() != weights.cols() {
            return Err(Error::ShapeMismatch {
                op: "focus layer",
                left: weights.shape(),
                right: (focus.inputs, focus.neurons()),
            });
        }
        if bias.len() != weights.cols() {
            return Err(Error::ShapeMismatch {
                op: "focus bias",
                left: weights.shape(),
                right: (1, bias.len()),
            });
        }
        let n = weights.cols();
        Ok(Self {
            grad_weights: Matrix::zeros(weights.rows(), n),
            grad_bias: vec![0.0; n],
            grad_mu: vec![0.0; n],
            grad_sigma: vec![0.0; n],
            weights,
            bias,
            focus,
            frozen: false,
            scaler_gradient: ScalerGradient::Total,
            cache: None,
        })
    }

    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn coefficients(&self) -> Result<FocusCoefficients> {
        focus_coefficients(&self.focus)
    }

    /// `Φ ⊙ W`, the weights a plain dense layer would need to reproduce this layer.
    pub fn effective_weights(&self) -> Result<Matrix> {
        self.coefficients()?.phi.hadamard(&self.weights)
    }

    pub fn infer(&self, x: &Matrix) -> Result<Matrix> {
        affine(x, &self.effective_weights()?, &self.bias, "focus_forward")
    }

    pub fn forward(&mut self, x: &Matrix) -> Result<Matrix> {
        let coeffs = self.coefficients()?;
        let effective = coeffs.phi.hadamard(&self.weights)?;
        let net = affine(x, &effective, &self.bias, "focus_forward")?;
        self.cache = Some(Cache {
            input: x.clone(),
            coeffs,
            effective,
        });
        Ok(net)
    }

    /// Fills the gradients of `W`, `b`, `mu` and `sigma` (the latter two stay
    /// zero when the layer is frozen).
    pub fn backward_params(&mut self, dnet: &Matrix) -> Result<()> {
        let cache = self
            .cache
            .as_ref()
            .ok_or(Error::BackwardBeforeForward { layer: "focus" })?;
        check_dnet(dnet, cache.input.rows(), self.outputs(), "focus_backward")?;
        // gradient with respect to the effective weights
        let grad_eff = cache.input.matmul_tn(dnet)?;
        self.grad_weights = grad_eff.hadamard(&cache.coeffs.phi)?;
        self.grad_bias = dnet.column_sums();
        if self.frozen {
            self.grad_mu.iter_mut().for_each(|g| *g = 0.0);
            self.grad_sigma.iter_mut().for_each(|g| *g = 0.0);
        } else {
            let upstream = grad_eff.hadamard(&self.weights)?;
            let (dmu, dsigma) = focus_gradients_with(&self.focus, &cache.coeffs, &upstream, self.scaler_gradient)?;
            self.grad_mu = dmu;
            self.grad_sigma = dsigma;
        }
        Ok(())
    }

    /// Fills the parameter gradients and returns `dx = dnet (Φ ⊙ W)ᵀ`.
    pub fn backward(&mut self, dnet: &Matrix) -> Result<Matrix> {
        self.backward_params(dnet)?;
        let cache = self.cache.as_ref().expect("cache set by backward_params");
        dnet.matmul_nt(&cache.effective)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::DenseLayer;
    use crate::numerics::{sample_uniform, Rng};

    fn random_layer(rng: &mut Rng, m: usize, n: usize, sigma: f64) -> FocusLayer {
        let w = sample_uniform(rng, -1.0, 1.0, m, n).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.uniform(-0.5, 0.5)).collect();
        let mu: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 1.0)).collect();
        let focus = FocusParams::new(mu, vec![sigma; n], m).unwrap();
        FocusLayer::new(w, b, focus).unwrap()
    }

    #[test]
    fn wide_aperture_matches_dense() {
        let mut rng = Rng::new(5);
        for (sigma, tol) in [(100.0, 1e-3), (1e4, 1e-6)] {
            let mut focus = random_layer(&mut rng, 12, 4, sigma);
            let mut dense = DenseLayer::new(focus.weights.clone(), focus.bias.clone()).unwrap();
            let x = sample_uniform(&mut rng, -1.0, 1.0, 6, 12).unwrap();
            let a = focus.forward(&x).unwrap();
            let b = dense.forward(&x).unwrap();
            assert!(a.sub(&b).unwrap().max_abs() < tol);
            let dnet = sample_uniform(&mut rng, -1.0, 1.0, 6, 4).unwrap();
            let da = focus.backward(&dnet).unwrap();
            let db = dense.backward(&dnet).unwrap();
            assert!(da.sub(&db).unwrap().max_abs() < tol);
        }
    }

    #[test]
    fn zero_weights_give_bias() {
        let mut rng = Rng::new(6);
        let mut layer = random_layer(&mut rng, 5, 3, 0.2);
        layer.weights = Matrix::zeros(5, 3);
        let x = sample_uniform(&mut rng, -1.0, 1.0, 4, 5).unwrap();
        let net = layer.infer(&x).unwrap();
        for r in 0..4 {
            assert_eq!(net.row(r), layer.bias.as_slice());
        }
    }

    #[test]
    fn forward_is_dense_over_effective_weights() {
        let mut rng = Rng::new(7);
        let layer = random_layer(&mut rng, 9, 3, 0.15);
        let dense = DenseLayer::new(layer.effective_weights().unwrap(), layer.bias.clone()).unwrap();
        let x = sample_uniform(&mut rng, -1.0, 1.0, 5, 9).unwrap();
        // bit-identical, not merely close
        assert_eq!(layer.infer(&x).unwrap(), dense.infer(&x).unwrap());
    }

    #[test]
    fn zero_upstream_zeroes_everything() {
        let mut rng = Rng::new(8);
        let mut layer = random_layer(&mut rng, 6, 2, 0.1);
        let x = sample_uniform(&mut rng, -1.0, 1.0, 3, 6).unwrap();
        layer.forward(&x).unwrap();
        layer.backward(&Matrix::zeros(3, 2)).unwrap();
        assert_eq!(layer.grad_weights.max_abs(), 0.0);
        assert!(layer.grad_mu.iter().chain(&layer.grad_sigma).all(|&g| g == 0.0));
    }

    #[test]
    fn weight_gradient_is_dense_gradient_scaled_by_phi() {
        let mut rng = Rng::new(9);
        let mut layer = random_layer(&mut rng, 7, 3, 0.2);
        layer.scaler_gradient = ScalerGradient::Constant;
        layer.frozen = true;
        let mut dense = DenseLayer::new(layer.weights.clone(), layer.bias.clone()).unwrap();
        let x = sample_uniform(&mut rng, -1.0, 1.0, 5, 7).unwrap();
        let dnet = sample_uniform(&mut rng, -1.0, 1.0, 5, 3).unwrap();
        layer.forward(&x).unwrap();
        layer.backward(&dnet).unwrap();
        dense.forward(&x).unwrap();
        dense.backward(&dnet).unwrap();
        let phi = layer.coefficients().unwrap().phi;
        let expected = dense.grad_weights.hadamard(&phi).unwrap();
        assert!(layer.grad_weights.sub(&expected).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn backward_before_forward() {
        let mut rng = Rng::new(10);
        let mut layer = random_layer(&mut rng, 4, 2, 0.2);
        assert!(layer.backward(&Matrix::zeros(1, 2)).is_err());
    }
}
