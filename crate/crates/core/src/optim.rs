//! SGD with classical momentum, per-group learning rates, focus clipping
//! and step decay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::focus::{FocusParams, ScalerGradient};
use crate::layers::ParamSlot;

/// Learning-rate group a parameter belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamGroup {
    General,
    FocusMu,
    FocusSigma,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningRates {
    pub general: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl LearningRates {
    pub fn get(&self, group: ParamGroup) -> f64 {
        match group {
            ParamGroup::General => self.general,
            ParamGroup::FocusMu => self.mu,
            ParamGroup::FocusSigma => self.sigma,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            general: self.general * factor,
            mu: self.mu * factor,
            sigma: self.sigma * factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, lr) in [("general", self.general), ("mu", self.mu), ("sigma", self.sigma)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::invalid(format!("learning rate `{name}` must be > 0, got {lr}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipBounds {
    pub mu_min: f64,
    pub mu_max: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl Default for ClipBounds {
    fn default() -> Self {
        Self {
            mu_min: 0.0,
            mu_max: 1.0,
            sigma_min: 0.01,
            sigma_max: 0.5,
        }
    }
}

impl ClipBounds {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu_min < self.mu_max) {
            return Err(Error::invalid("clip bounds need mu_min < mu_max"));
        }
        if !(self.sigma_min > 0.0 && self.sigma_min < self.sigma_max) {
            return Err(Error::invalid("clip bounds need 0 < sigma_min < sigma_max"));
        }
        Ok(())
    }

    pub fn contains(&self, params: &FocusParams) -> bool {
        params.mu.iter().all(|m| (self.mu_min..=self.mu_max).contains(m))
            && params
                .sigma
                .iter()
                .all(|s| (self.sigma_min..=self.sigma_max).contains(s))
    }
}

pub fn clip_focus(params: &mut FocusParams, bounds: &ClipBounds) {
    for m in &mut params.mu {
        *m = m.clamp(bounds.mu_min, bounds.mu_max);
    }
    for s in &mut params.sigma {
        *s = s.clamp(bounds.sigma_min, bounds.sigma_max);
    }
}

/// Step decay: `lr(e) = lr0 * factor^floor(e / period)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrSchedule {
    pub factor: f64,
    pub period: usize,
}

impl Default for LrSchedule {
    fn default() -> Self {
        Self {
            factor: 1.0,
            period: 30,
        }
    }
}

impl LrSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.factor > 0.0 && self.factor <= 1.0) {
            return Err(Error::invalid(format!("decay factor {} outside (0, 1]", self.factor)));
        }
        if self.period == 0 {
            return Err(Error::invalid("decay period must be >= 1 epoch"));
        }
        Ok(())
    }

    pub fn multiplier(&self, epoch: usize) -> f64 {
        self.factor.powi((epoch / self.period) as i32)
    }
}

pub fn decay_lr(base: &LearningRates, schedule: &LrSchedule, epoch: usize) -> LearningRates {
    base.scaled(schedule.multiplier(epoch))
}

/// One heavy-ball update: `v <- momentum v - lr g`, `p <- p + v`.
pub fn sgd_step(
    name: &str,
    values: &mut [f64],
    grads: &[f64],
    velocity: &mut [f64],
    lr: f64,
    momentum: f64,
) -> Result<()> {
    if values.len() != grads.len() || values.len() != velocity.len() {
        return Err(Error::ShapeMismatch {
            op: "sgd_step",
            left: (values.len(), 1),
            right: (grads.len(), velocity.len()),
        });
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient {
            param: name.to_string(),
        });
    }
    for ((p, &g), v) in values.iter_mut().zip(grads).zip(velocity.iter_mut()) {
        *v = momentum * *v - lr * g;
        *p += *v;
    }
    Ok(())
}

/// Momentum SGD over an ordered list of parameter slots. Velocity buffers
/// are created lazily on the first step and matched to slots by position.
#[derive(Clone, Debug)]
pub struct Sgd {
    pub momentum: f64,
    velocities: Vec<Vec<f64>>,
}

impl Sgd {
    pub fn new(momentum: f64) -> Self {
        Self {
            momentum,
            velocities: Vec::new(),
        }
    }

    pub fn with_velocities(momentum: f64, velocities: Vec<Vec<f64>>) -> Self {
        Self { momentum, velocities }
    }

    pub fn velocities(&self) -> &[Vec<f64>] {
        &self.velocities
    }

    pub fn step(&mut self, slots: Vec<ParamSlot<'_>>, rates: &LearningRates) -> Result<()> {
        // validate everything first so a bad gradient leaves all parameters untouched
        for slot in &slots {
            if slot.grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteGradient {
                    param: slot.name.clone(),
                });
            }
        }
        if self.velocities.is_empty() {
            self.velocities = slots.iter().map(|s| vec![0.0; s.values.len()]).collect();
        }
        if self.velocities.len() != slots.len() {
            return Err(Error::invalid(format!(
                "optimizer holds {} velocity buffers but got {} parameters",
                self.velocities.len(),
                slots.len()
            )));
        }
        for (slot, velocity) in slots.into_iter().zip(self.velocities.iter_mut()) {
            sgd_step(
                &slot.name,
                slot.values,
                slot.grads,
                velocity,
                rates.get(slot.group),
                self.momentum,
            )?;
        }
        Ok(())
    }
}

/// Optimization hyperparameters for one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub momentum: f64,
    pub learning_rates: LearningRates,
    #[serde(default)]
    pub decay: LrSchedule,
    #[serde(default)]
    pub clip: ClipBounds,
    #[serde(default)]
    pub scaler_gradient: ScalerGradient,
    /// Record focus parameters after every epoch.
    #[serde(default)]
    pub log_trajectory: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 500,
            seed: 0,
            momentum: 0.9,
            learning_rates: LearningRates {
                general: 0.1,
                mu: 0.01,
                sigma: 0.001,
            },
            decay: LrSchedule::default(),
            clip: ClipBounds::default(),
            scaler_gradient: ScalerGradient::Total,
            log_trajectory: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        self.learning_rates.validate()?;
        self.decay.validate()?;
        self.clip.validate()
    }
}
