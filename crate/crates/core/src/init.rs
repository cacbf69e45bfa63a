//! Parameter initialization.
//!
//! Weight schemes for a focusing neuron with coefficient column `phi`:
//!
//! | scheme            | distribution                                                  |
//! |-------------------|---------------------------------------------------------------|
//! | `focus-norm`      | `U[-sqrt(6)/||phi||, +sqrt(6)/||phi||]` (rectified-linear gain) |
//! | `focus-identical` | variance `1 / ((s_x^2 + mu_x^2) * sum phi^2)` for every weight  |
//! | `focus-per-weight`| variance `1 / (m (s_x^2 + mu_x^2) phi_i^2)` for weight `i`      |
//! | `dense-uniform`   | `U[-sqrt(6/m), +sqrt(6/m)]`, ignoring `phi`                     |
//!
//! The two variance-matched schemes sample uniformly with half-width
//! `sqrt(3 * variance)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::focus::{focus_coefficients, FocusParams};
use crate::layers::{DenseLayer, FocusLayer};
use crate::numerics::{Matrix, Rng};
use crate::optim::ClipBounds;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    DenseUniform,
    #[default]
    FocusNorm,
    FocusIdentical,
    FocusPerWeight,
}

/// Which coefficient vector the focus schemes measure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiSource {
    /// Scaled coefficients; `sum phi^2 = m`, so `focus-norm` becomes `sqrt(6/m)`.
    #[default]
    Scaled,
    /// Unnormalized Gaussian terms.
    Raw,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MuScheme {
    /// Evenly spaced on `[lo, hi]`, endpoints included.
    Spread { lo: f64, hi: f64 },
    /// Independent uniform draws on `[lo, hi)`.
    Random { lo: f64, hi: f64 },
    /// `0.5 + U[-jitter, jitter)`.
    Center { jitter: f64 },
}

impl Default for MuScheme {
    fn default() -> Self {
        MuScheme::Spread { lo: 0.2, hi: 0.8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    #[serde(default)]
    pub weights: WeightScheme,
    #[serde(default)]
    pub mu: MuScheme,
    #[serde(default = "default_sigma0")]
    pub sigma0: f64,
    #[serde(default)]
    pub phi_source: PhiSource,
    /// Input variance `s_x^2` assumed by the variance-matched schemes.
    #[serde(default = "one")]
    pub input_variance: f64,
    /// Input mean `mu_x` assumed by the variance-matched schemes.
    #[serde(default)]
    pub input_mean: f64,
}

fn default_sigma0() -> f64 {
    0.1
}

fn one() -> f64 {
    1.0
}

impl Default for InitSpec {
    fn default() -> Self {
        Self {
            weights: WeightScheme::FocusNorm,
            mu: MuScheme::default(),
            sigma0: default_sigma0(),
            phi_source: PhiSource::Scaled,
            input_variance: 1.0,
            input_mean: 0.0,
        }
    }
}

impl InitSpec {
    pub fn validate(&self, clip: &ClipBounds) -> Result<()> {
        match self.mu {
            MuScheme::Spread { lo, hi } | MuScheme::Random { lo, hi } => {
                if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                    return Err(Error::invalid(format!(
                        "mu bounds [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1"
                    )));
                }
            }
            MuScheme::Center { jitter } => {
                if !(0.0..=0.5).contains(&jitter) {
                    return Err(Error::invalid(format!("mu jitter {jitter} outside [0, 0.5]")));
                }
            }
        }
        if !(clip.sigma_min..=clip.sigma_max).contains(&self.sigma0) {
            return Err(Error::invalid(format!(
                "sigma0 {} outside [{}, {}]",
                self.sigma0, clip.sigma_min, clip.sigma_max
            )));
        }
        Ok(())
    }
}

fn uniform_vec(rng: &mut Rng, half_widths: impl Iterator<Item = f64>) -> Vec<f64> {
    half_widths.map(|h| rng.uniform(-h, h)).collect()
}

fn squared_norm(phi: &[f64]) -> f64 {
    phi.iter().map(|p| p * p).sum()
}

fn second_moment(input_variance: f64, input_mean: f64) -> Result<f64> {
    let q = input_variance + input_mean * input_mean;
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::invalid(format!(
            "input second moment s_x^2 + mu_x^2 = {q} must be > 0"
        )));
    }
    Ok(q)
}

/// `U[-sqrt(6)/||phi||, +sqrt(6)/||phi||]`, one draw per entry of `phi`.
pub fn init_focus_weights_norm(phi: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
    let sq = squared_norm(phi);
    if !(sq > 0.0) {
        return Err(Error::invalid("focus column has zero norm"));
    }
    let bound = 6f64.sqrt() / sq.sqrt();
    Ok(uniform_vec(rng, std::iter::repeat_n(bound, phi.len())))
}

/// Common weight variance `1 / ((s_x^2 + mu_x^2) * sum phi^2)`.
pub fn identical_variance(phi: &[f64], input_variance: f64, input_mean: f64) -> Result<f64> {
    let q = second_moment(input_variance, input_mean)?;
    let sq = squared_norm(phi);
    if !(sq > 0.0) {
        return Err(Error::invalid("focus column has zero norm"));
    }
    Ok(1.0 / (q * sq))
}

pub fn init_focus_weights_identical(
    phi: &[f64],
    input_variance: f64,
    input_mean: f64,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let var = identical_variance(phi, input_variance, input_mean)?;
    let half = (3.0 * var).sqrt();
    Ok(uniform_vec(rng, std::iter::repeat_n(half, phi.len())))
}

/// Per-weight variances `1 / (m (s_x^2 + mu_x^2) phi_i^2)`.
pub fn per_weight_variances(phi: &[f64], input_variance: f64, input_mean: f64) -> Result<Vec<f64>> {
    let q = second_moment(input_variance, input_mean)?;
    let m = phi.len() as f64;
    phi.iter()
        .enumerate()
        .map(|(i, &p)| {
            if p == 0.0 || !p.is_finite() {
                Err(Error::invalid(format!(
                    "focus coefficient {i} is {p}; per-weight variance undefined"
                )))
            } else {
                Ok(1.0 / (m * q * p * p))
            }
        })
        .collect()
}

pub fn init_focus_weights_per_weight(
    phi: &[f64],
    input_variance: f64,
    input_mean: f64,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let vars = per_weight_variances(phi, input_variance, input_mean)?;
    Ok(uniform_vec(rng, vars.into_iter().map(|v| (3.0 * v).sqrt())))
}

/// `U[-sqrt(6/fan_in), +sqrt(6/fan_in)]`, shape `fan_in × fan_out`.
pub fn init_dense_weights(fan_in: usize, fan_out: usize, rng: &mut Rng) -> Result<Matrix> {
    if fan_in == 0 {
        return Err(Error::invalid("fan_in must be >= 1"));
    }
    let bound = (6.0 / fan_in as f64).sqrt();
    Ok(Matrix::from_fn(fan_in, fan_out, |_, _| rng.uniform(-bound, bound)))
}

pub fn init_mu(n: usize, scheme: &MuScheme, rng: &mut Rng) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("need at least one neuron"));
    }
    match *scheme {
        MuScheme::Spread { lo, hi } => {
            if !(lo <= hi) {
                return Err(Error::invalid(format!("spread bounds [{lo}, {hi}] inverted")));
            }
            if n == 1 {
                return Ok(vec![0.5 * (lo + hi)]);
            }
            let step = (hi - lo) / (n - 1) as f64;
            Ok((0..n).map(|j| lo + step * j as f64).collect())
        }
        MuScheme::Random { lo, hi } => {
            if !(lo <= hi) {
                return Err(Error::invalid(format!("random bounds [{lo}, {hi}] inverted")));
            }
            Ok((0..n).map(|_| rng.uniform(lo, hi)).collect())
        }
        MuScheme::Center { jitter } => {
            if !(jitter >= 0.0) {
                return Err(Error::invalid(format!("jitter {jitter} must be >= 0")));
            }
            Ok((0..n).map(|_| 0.5 + rng.uniform(-jitter, jitter)).collect())
        }
    }
}

pub fn init_sigma(n: usize, sigma0: f64, clip: &ClipBounds) -> Result<Vec<f64>> {
    if !(clip.sigma_min..=clip.sigma_max).contains(&sigma0) {
        return Err(Error::invalid(format!(
            "sigma0 {sigma0} outside [{}, {}]",
            clip.sigma_min, clip.sigma_max
        )));
    }
    Ok(vec![sigma0; n])
}

/// Builds a focusing layer: foci first, then weights column by column from
/// each neuron's own coefficient column. Biases start at zero.
pub fn init_focus_layer(
    inputs: usize,
    outputs: usize,
    spec: &InitSpec,
    clip: &ClipBounds,
    rng: &mut Rng,
) -> Result<FocusLayer> {
    let mu = init_mu(outputs, &spec.mu, rng)?;
    let sigma = init_sigma(outputs, spec.sigma0, clip)?;
    let focus = FocusParams::new(mu, sigma, inputs)?;
    let weights = match spec.weights {
        WeightScheme::DenseUniform => init_dense_weights(inputs, outputs, rng)?,
        scheme => {
            let coeffs = focus_coefficients(&focus)?;
            let source = match spec.phi_source {
                PhiSource::Scaled => &coeffs.phi,
                PhiSource::Raw => &coeffs.raw,
            };
            let mut w = Matrix::zeros(inputs, outputs);
            for j in 0..outputs {
                let col = source.column(j);
                let sampled = match scheme {
                    WeightScheme::FocusNorm => init_focus_weights_norm(&col, rng)?,
                    WeightScheme::FocusIdentical => {
                        init_focus_weights_identical(&col, spec.input_variance, spec.input_mean, rng)?
                    }
                    WeightScheme::FocusPerWeight => {
                        init_focus_weights_per_weight(&col, spec.input_variance, spec.input_mean, rng)?
                    }
                    WeightScheme::DenseUniform => unreachable!(),
                };
                for (i, v) in sampled.into_iter().enumerate() {
                    w.set(i, j, v);
                }
            }
            w
        }
    };
    FocusLayer::new(weights, vec![0.0; outputs], focus)
}

pub fn init_dense_layer(inputs: usize, outputs: usize, rng: &mut Rng) -> Result<DenseLayer> {
    DenseLayer::new(init_dense_weights(inputs, outputs, rng)?, vec![0.0; outputs])
}
