use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Row-wise softmax, shifted by the row max for stability.
pub fn softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    out
}

/// Mean cross-entropy over the batch and its gradient `(softmax - onehot) / batch`.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<(f64, Matrix)> {
    if labels.len() != logits.rows() {
        return Err(Error::ShapeMismatch {
            op: "softmax_cross_entropy",
            left: logits.shape(),
            right: (labels.len(), 1),
        });
    }
    let classes = logits.cols();
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::invalid(format!(
            "label {bad} out of range for {classes} classes"
        )));
    }
    let batch = logits.rows() as f64;
    let mut grad = softmax(logits);
    let mut loss = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        // log-sum-exp form keeps the loss finite for large margins
        let row = logits.row(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[label];
        let g = grad.row_mut(r);
        g[label] -= 1.0;
        for v in g.iter_mut() {
            *v /= batch;
        }
    }
    Ok((loss / batch, grad))
}

/// Mean squared error over all entries and its gradient `2 (pred - target) / count`.
pub fn mse(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix)> {
    let diff = pred.sub(target).map_err(|_| Error::ShapeMismatch {
        op: "mse",
        left: pred.shape(),
        right: target.shape(),
    })?;
    let count = diff.len() as f64;
    let loss = diff.as_slice().iter().map(|d| d * d).sum::<f64>() / count;
    Ok((loss, diff.scale(2.0 / count)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_give_log_classes() {
        let (loss, _) = softmax_cross_entropy(&Matrix::zeros(4, 7), &[0, 3, 6, 2]).unwrap();
        assert!((loss - 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn dominant_logit_drives_loss_to_zero() {
        let logits = Matrix::from_rows(&[[800.0, 0.0, 0.0]]).unwrap();
        let (loss, grad) = softmax_cross_entropy(&logits, &[0]).unwrap();
        assert!(loss < 1e-12);
        assert!(grad.max_abs() < 1e-12);
    }

    #[test]
    fn label_out_of_range() {
        assert!(softmax_cross_entropy(&Matrix::zeros(1, 3), &[3]).is_err());
    }

    #[test]
    fn gradient_rows_sum_to_zero() {
        let logits = Matrix::from_rows(&[[0.3, -1.2, 2.0], [1.0, 1.0, -4.0]]).unwrap();
        let (_, g) = softmax_cross_entropy(&logits, &[2, 0]).unwrap();
        for r in 0..2 {
            assert!(g.row(r).iter().sum::<f64>().abs() < 1e-15);
        }
    }

    #[test]
    fn mse_cases() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(mse(&a, &a).unwrap().0, 0.0);
        let b = a.map(|v| v + 1.0);
        let (loss, grad) = mse(&b, &a).unwrap();
        assert_eq!(loss, 1.0);
        assert!(grad.as_slice().iter().all(|&g| g == 0.5));
        assert!(mse(&a, &Matrix::zeros(1, 2)).is_err());
    }
}
