use super::dense::check_dnet;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Clone, Debug, Default)]
pub struct ReluLayer {
    input: Option<Matrix>,
}

pub fn relu(x: &Matrix) -> Matrix {
    x.map(|v| v.max(0.0))
}

impl ReluLayer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn forward(&mut self, x: &Matrix) -> Matrix {
        self.input = Some(x.clone());
        relu(x)
    }

    pub fn backward(&mut self, dout: &Matrix) -> Result<Matrix> {
        let x = self
            .input
            .as_ref()
            .ok_or(Error::BackwardBeforeForward { layer: "relu" })?;
        check_dnet(dout, x.rows(), x.cols(), "relu_backward")?;
        // subgradient 0 at the kink
        Ok(Matrix::from_fn(x.rows(), x.cols(), |r, c| {
            if x.get(r, c) > 0.0 {
                dout.get(r, c)
            } else {
                0.0
            }
        }))
    }
}
