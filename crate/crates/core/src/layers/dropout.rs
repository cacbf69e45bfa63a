use super::dense::check_dnet;
use super::Mode;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Inverted dropout: kept units are scaled by `1 / (1 - rate)` at train
/// time so that eval mode is the identity.
#[derive(Clone, Debug)]
pub struct DropoutLayer {
    rate: f64,
    mask: Option<Matrix>,
}

impl DropoutLayer {
    pub fn new(rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::invalid(format!("dropout rate {rate} must lie in [0, 1)")));
        }
        Ok(Self { rate, mask: None })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn forward(&mut self, x: &Matrix, mode: Mode, rng: &mut Rng) -> Result<Matrix> {
        let mask = match mode {
            Mode::Eval => Matrix::filled(x.rows(), x.cols(), 1.0),
            Mode::Train if self.rate == 0.0 => Matrix::filled(x.rows(), x.cols(), 1.0),
            Mode::Train => {
                let keep = 1.0 - self.rate;
                let scale = 1.0 / keep;
                Matrix::from_fn(x.rows(), x.cols(), |_, _| if rng.unit() < keep { scale } else { 0.0 })
            }
        };
        let out = x.hadamard(&mask)?;
        self.mask = Some(mask);
        Ok(out)
    }

    pub fn backward(&mut self, dout: &Matrix) -> Result<Matrix> {
        let mask = self
            .mask
            .as_ref()
            .ok_or(Error::BackwardBeforeForward { layer: "dropout" })?;
        check_dnet(dout, mask.rows(), mask.cols(), "dropout_backward")?;
        dout.hadamard(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sample_uniform;

    #[test]
    fn zero_rate_is_identity_in_both_modes() {
        let mut rng = Rng::new(1);
        let x = sample_uniform(&mut rng, -1.0, 1.0, 4, 6).unwrap();
        let mut d = DropoutLayer::new(0.0).unwrap();
        assert_eq!(d.forward(&x, Mode::Train, &mut rng).unwrap(), x);
        assert_eq!(d.forward(&x, Mode::Eval, &mut rng).unwrap(), x);
    }

    #[test]
    fn eval_is_identity_and_consumes_no_randomness() {
        let mut rng = Rng::new(2);
        let x = sample_uniform(&mut rng, -1.0, 1.0, 4, 6).unwrap();
        let before = rng.state();
        let mut d = DropoutLayer::new(0.5).unwrap();
        assert_eq!(d.forward(&x, Mode::Eval, &mut rng).unwrap(), x);
        assert_eq!(rng.state(), before);
    }

    #[test]
    fn train_mode_preserves_expectation() {
        let mut rng = Rng::new(3);
        let x = Matrix::filled(200, 200, 1.0);
        let mut d = DropoutLayer::new(0.25).unwrap();
        let y = d.forward(&x, Mode::Train, &mut rng).unwrap();
        let mean = y.sum() / y.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
        let kept = y.as_slice().iter().filter(|&&v| v != 0.0).count() as f64 / y.len() as f64;
        assert!((kept - 0.75).abs() < 0.01);
    }

    #[test]
    fn backward_applies_same_mask() {
        let mut rng = Rng::new(4);
        let x = Matrix::filled(3, 5, 2.0);
        let mut d = DropoutLayer::new(0.5).unwrap();
        let y = d.forward(&x, Mode::Train, &mut rng).unwrap();
        let g = d.backward(&Matrix::filled(3, 5, 1.0)).unwrap();
        for (a, b) in y.as_slice().iter().zip(g.as_slice()) {
            assert_eq!(*a, 2.0 * b);
        }
    }

    #[test]
    fn invalid_rates() {
        assert!(DropoutLayer::new(1.0).is_err());
        assert!(DropoutLayer::new(-0.1).is_err());
    }
}
