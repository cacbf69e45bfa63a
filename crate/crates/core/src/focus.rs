//! Gaussian focus coefficients and their derivatives.
//!
//! A focusing neuron `j` with center `mu[j]` and aperture `sigma[j]` weights
//! input `i` (at normalized position `tau[i]`) by
//!
//! ```text
//! phi[i][j] = s[j] * exp(-(tau[i] - mu[j])^2 / (2 sigma[j]^2))
//! s[j]      = sqrt(m) / sqrt(sum_i exp(...)^2)
//! ```
//!
//! so every column of `phi` has squared norm `m`, the norm of an all-ones
//! (fully connected) column. Positions are `tau[i] = i / (m - 1)`, covering
//! `[0, 1]` inclusive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Lower bound applied to sigma before any derivative is evaluated.
pub const SIGMA_FLOOR: f64 = 0.01;

/// How the scaler `s` is treated when differentiating.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalerGradient {
    /// Differentiate through `s(mu, sigma)`; matches finite differences of the forward map.
    #[default]
    Total,
    /// Hold `s` constant: only the exponential term is differentiated.
    Constant,
}

/// Per-neuron receptive-field state for a layer with `inputs` inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct FocusParams {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub inputs: usize,
}

impl FocusParams {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>, inputs: usize) -> Result<Self> {
        let params = Self { mu, sigma, inputs };
        params.validate()?;
        Ok(params)
    }

    pub fn neurons(&self) -> usize {
        self.mu.len()
    }

    /// Checks the forward-pass preconditions: matching lengths, finite
    /// centers, strictly positive apertures, at least two inputs.
    pub fn validate(&self) -> Result<()> {
        if self.mu.len() != self.sigma.len() {
            return Err(Error::invalid(format!(
                "mu has {} entries but sigma has {}",
                self.mu.len(),
                self.sigma.len()
            )));
        }
        if self.inputs < 2 {
            return Err(Error::invalid(format!(
                "a focus layer needs at least 2 inputs, got {}",
                self.inputs
            )));
        }
        if let Some(j) = self.mu.iter().position(|m| !m.is_finite()) {
            return Err(Error::invalid(format!("mu[{j}] is not finite")));
        }
        if let Some(j) = self.sigma.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid(format!(
                "sigma[{j}] = {} must be finite and > 0",
                self.sigma[j]
            )));
        }
        Ok(())
    }
}

/// Coefficients for one layer: `phi = raw ⊙ s` (column-wise), shape `m × n`.
#[derive(Clone, Debug)]
pub struct FocusCoefficients {
    pub phi: Matrix,
    pub scaler: Vec<f64>,
    pub raw: Matrix,
}

/// Normalized input positions `i / (m - 1)`, `i = 0..m`.
pub fn positions(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::invalid(format!("positions need m >= 2, got {m}")));
    }
    let last = (m - 1) as f64;
    Ok((0..m).map(|i| i as f64 / last).collect())
}

/// Unnormalized Gaussian terms, `m × n`.
pub fn focus_raw(positions: &[f64], params: &FocusParams) -> Result<Matrix> {
    if let Some(j) = params.sigma.iter().position(|s| !(*s > 0.0)) {
        return Err(Error::invalid(format!("sigma[{j}] = {} must be > 0", params.sigma[j])));
    }
    if params.mu.len() != params.sigma.len() {
        return Err(Error::invalid("mu and sigma lengths differ"));
    }
    let n = params.neurons();
    Ok(Matrix::from_fn(positions.len(), n, |i, j| {
        let d = positions[i] - params.mu[j];
        let s = params.sigma[j];
        (-(d * d) / (2.0 * s * s)).exp()
    }))
}

/// Per-neuron scaler `sqrt(m) / ||raw[:, j]||`.
pub fn scaler(raw: &Matrix, m: usize) -> Result<Vec<f64>> {
    if raw.rows() != m {
        return Err(Error::ShapeMismatch {
            op: "scaler",
            left: raw.shape(),
            right: (m, raw.cols()),
        });
    }
    let sqrt_m = (m as f64).sqrt();
    (0..raw.cols())
        .map(|j| {
            let sq: f64 = (0..m).map(|i| raw.get(i, j).powi(2)).sum();
            if sq > 0.0 && sq.is_finite() {
                Ok(sqrt_m / sq.sqrt())
            } else {
                Err(Error::invalid(format!(
                    "focus column {j} has zero norm; cannot normalize"
                )))
            }
        })
        .collect()
}

pub fn focus_coefficients(params: &FocusParams) -> Result<FocusCoefficients> {
    params.validate()?;
    let tau = positions(params.inputs)?;
    let raw = focus_raw(&tau, params)?;
    let s = scaler(&raw, params.inputs)?;
    let mut phi = raw.clone();
    for i in 0..phi.rows() {
        for (v, &sj) in phi.row_mut(i).iter_mut().zip(&s) {
            *v *= sj;
        }
    }
    Ok(FocusCoefficients { phi, scaler: s, raw })
}

/// Gradients of a loss with respect to `mu` and `sigma`, given the loss
/// gradient with respect to every coefficient (`upstream`, `m × n`).
///
/// With `d = tau - mu` and `a` standing for `d / sigma^2` (center) or
/// `d^2 / sigma^3` (aperture), the exponential term contributes
/// `sum_i U_i phi_i a_i`. Under [`ScalerGradient::Total`] the scaler adds
/// `-(sum_i U_i phi_i) * (sum_k g_k^2 a_k) / (sum_k g_k^2)`.
pub fn focus_gradients(params: &FocusParams, upstream: &Matrix, mode: ScalerGradient) -> Result<(Vec<f64>, Vec<f64>)> {
    let clamped = FocusParams {
        mu: params.mu.clone(),
        sigma: params.sigma.iter().map(|s| s.max(SIGMA_FLOOR)).collect(),
        inputs: params.inputs,
    };
    let coeffs = focus_coefficients(&clamped)?;
    focus_gradients_with(&clamped, &coeffs, upstream, mode)
}

/// As [`focus_gradients`], reusing coefficients already computed for `params`.
pub fn focus_gradients_with(
    params: &FocusParams,
    coeffs: &FocusCoefficients,
    upstream: &Matrix,
    mode: ScalerGradient,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = params.inputs;
    let n = params.neurons();
    if upstream.shape() != (m, n) || coeffs.phi.shape() != (m, n) {
        return Err(Error::ShapeMismatch {
            op: "focus_gradients",
            left: upstream.shape(),
            right: (m, n),
        });
    }
    let tau = positions(m)?;
    let mut dmu = vec![0.0; n];
    let mut dsigma = vec![0.0; n];
    for j in 0..n {
        let mu = params.mu[j];
        let sigma = params.sigma[j].max(SIGMA_FLOOR);
        let s2 = sigma * sigma;
        let s3 = s2 * sigma;

        let mut direct_mu = 0.0;
        let mut direct_sigma = 0.0;
        let mut u_phi = 0.0;
        let mut g2 = 0.0;
        let mut g2_mu = 0.0;
        let mut g2_sigma = 0.0;
        for (i, &t) in tau.iter().enumerate() {
            let d = t - mu;
            let a_mu = d / s2;
            let a_sigma = d * d / s3;
            let phi = coeffs.phi.get(i, j);
            let u = upstream.get(i, j);
            direct_mu += u * phi * a_mu;
            direct_sigma += u * phi * a_sigma;
            u_phi += u * phi;
            let g = coeffs.raw.get(i, j);
            g2 += g * g;
            g2_mu += g * g * a_mu;
            g2_sigma += g * g * a_sigma;
        }
        match mode {
            ScalerGradient::Total => {
                dmu[j] = direct_mu - u_phi * g2_mu / g2;
                dsigma[j] = direct_sigma - u_phi * g2_sigma / g2;
            }
            ScalerGradient::Constant => {
                dmu[j] = direct_mu;
                dsigma[j] = direct_sigma;
            }
        }
    }
    Ok((dmu, dsigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sample_uniform, Rng};

    const E_MINUS_2: f64 = 0.1353352832366127;
    // sqrt(2 / (1 + e^-4))
    const S_M2: f64 = 1.4014376832652307;

    fn params(mu: &[f64], sigma: &[f64], m: usize) -> FocusParams {
        FocusParams::new(mu.to_vec(), sigma.to_vec(), m).unwrap()
    }

    #[test]
    fn position_grids() {
        assert_eq!(positions(2).unwrap(), vec![0.0, 1.0]);
        assert_eq!(positions(5).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(positions(1).is_err());
        let p = positions(13).unwrap();
        let gap = p.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        assert!((gap - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn raw_peaks_at_center_and_is_even() {
        let tau = positions(5).unwrap();
        let raw = focus_raw(&tau, &params(&[0.5], &[0.2], 5)).unwrap();
        assert_eq!(raw.get(2, 0), 1.0);
        assert_eq!(raw.get(1, 0), raw.get(3, 0));
        assert_eq!(raw.get(0, 0), raw.get(4, 0));
    }

    #[test]
    fn raw_two_inputs() {
        let tau = positions(2).unwrap();
        let raw = focus_raw(&tau, &params(&[0.0], &[0.5], 2)).unwrap();
        assert_eq!(raw.get(0, 0), 1.0);
        assert!((raw.get(1, 0) - E_MINUS_2).abs() < 1e-15);
    }

    #[test]
    fn raw_rejects_nonpositive_sigma() {
        let p = FocusParams {
            mu: vec![0.5],
            sigma: vec![0.0],
            inputs: 3,
        };
        assert!(focus_raw(&positions(3).unwrap(), &p).is_err());
        assert!(p.validate().is_err());
    }

    #[test]
    fn scaler_cases() {
        let ones = Matrix::filled(6, 2, 1.0);
        assert_eq!(scaler(&ones, 6).unwrap(), vec![1.0, 1.0]);

        let raw = Matrix::column_vector(&[1.0, E_MINUS_2]);
        let s = scaler(&raw, 2).unwrap();
        assert!((s[0] - S_M2).abs() < 1e-12);

        let zero = Matrix::zeros(3, 1);
        assert!(scaler(&zero, 3).is_err());
    }

    #[test]
    fn coefficients_two_inputs() {
        let c = focus_coefficients(&params(&[0.0], &[0.5], 2)).unwrap();
        assert!((c.phi.get(0, 0) - S_M2).abs() < 1e-12);
        assert!((c.phi.get(1, 0) - S_M2 * E_MINUS_2).abs() < 1e-12);
        assert!((c.phi.get(1, 0) - 0.18966).abs() < 1e-5);
    }

    #[test]
    fn wide_sigma_is_nearly_dense() {
        let c = focus_coefficients(&params(&[0.1, 0.9], &[100.0, 100.0], 30)).unwrap();
        assert!(c.phi.as_slice().iter().all(|&p| (p - 1.0).abs() < 1e-4));
    }

    #[test]
    fn centered_focus_is_symmetric() {
        let c = focus_coefficients(&params(&[0.5], &[0.13], 9)).unwrap();
        for i in 0..9 {
            assert!((c.phi.get(i, 0) - c.phi.get(8 - i, 0)).abs() < 1e-14);
        }
    }

    #[test]
    fn norm_and_positivity() {
        let mut rng = Rng::new(4);
        for _ in 0..50 {
            let m = 2 + rng.below(40);
            let n = 1 + rng.below(6);
            let mu: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 1.0)).collect();
            // below ~0.04 the far tail of the Gaussian underflows to 0.0 in f64
            let sigma: Vec<f64> = (0..n).map(|_| rng.uniform(0.05, 2.0)).collect();
            let c = focus_coefficients(&params(&mu, &sigma, m)).unwrap();
            for j in 0..n {
                let sq: f64 = (0..m).map(|i| c.phi.get(i, j).powi(2)).sum();
                assert!((sq - m as f64).abs() < 1e-9);
                for i in 0..m {
                    assert!(c.phi.get(i, j) > 0.0);
                    assert!((c.phi.get(i, j) - c.scaler[j] * c.raw.get(i, j)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn symmetric_upstream_gives_zero_center_gradient() {
        let p = params(&[0.5], &[0.2], 11);
        let up = Matrix::from_fn(11, 1, |i, _| {
            let d = (i as f64 - 5.0).abs();
            1.0 + d * 0.3
        });
        for mode in [ScalerGradient::Total, ScalerGradient::Constant] {
            let (dmu, _) = focus_gradients(&p, &up, mode).unwrap();
            assert!(dmu[0].abs() < 1e-12, "{}", dmu[0]);
        }
    }

    #[test]
    fn aperture_partials_nonnegative_before_scaler() {
        // with a positive upstream each exponential-term contribution is >= 0
        let p = params(&[0.3, 0.8], &[0.1, 0.4], 7);
        let up = Matrix::filled(7, 2, 1.0);
        let (_, dsigma) = focus_gradients(&p, &up, ScalerGradient::Constant).unwrap();
        assert!(dsigma.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let p = params(&[0.5], &[0.2], 4);
        assert!(focus_gradients(&p, &Matrix::zeros(3, 1), ScalerGradient::Total).is_err());
    }

    // Central differences of `sum(U ⊙ phi)` with respect to mu and sigma.
    fn fd_oracle(p: &FocusParams, up: &Matrix, h: f64) -> (Vec<f64>, Vec<f64>) {
        let loss = |q: &FocusParams| -> f64 {
            let c = focus_coefficients(q).unwrap();
            c.phi.hadamard(up).unwrap().sum()
        };
        let n = p.neurons();
        let mut dmu = vec![0.0; n];
        let mut dsigma = vec![0.0; n];
        for j in 0..n {
            let mut a = p.clone();
            let mut b = p.clone();
            a.mu[j] += h;
            b.mu[j] -= h;
            dmu[j] = (loss(&a) - loss(&b)) / (2.0 * h);
            let mut a = p.clone();
            let mut b = p.clone();
            a.sigma[j] += h;
            b.sigma[j] -= h;
            dsigma[j] = (loss(&a) - loss(&b)) / (2.0 * h);
        }
        (dmu, dsigma)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / (a.abs() + b.abs()).max(1e-5)
    }

    #[test]
    fn total_gradient_matches_finite_differences() {
        let mut rng = Rng::new(21);
        for _ in 0..20 {
            let m = 7;
            let n = 3;
            let mu: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 1.0)).collect();
            let sigma: Vec<f64> = (0..n).map(|_| rng.uniform(0.05, 0.5)).collect();
            let p = params(&mu, &sigma, m);
            let up = sample_uniform(&mut rng, -1.0, 1.0, m, n).unwrap();
            let (dmu, dsigma) = focus_gradients(&p, &up, ScalerGradient::Total).unwrap();
            let (fmu, fsigma) = fd_oracle(&p, &up, 1e-6);
            for j in 0..n {
                assert!(rel(dmu[j], fmu[j]) < 1e-4, "mu {} vs {}", dmu[j], fmu[j]);
                assert!(rel(dsigma[j], fsigma[j]) < 1e-4, "sigma {} vs {}", dsigma[j], fsigma[j]);
            }
        }
    }

    #[test]
    fn constant_scaler_mode_differs_from_total() {
        let p = params(&[0.2], &[0.15], 9);
        let up = Matrix::from_fn(9, 1, |i, _| i as f64 * 0.1 - 0.3);
        let (t, _) = focus_gradients(&p, &up, ScalerGradient::Total).unwrap();
        let (c, _) = focus_gradients(&p, &up, ScalerGradient::Constant).unwrap();
        assert!((t[0] - c[0]).abs() > 1e-6);
    }
}
