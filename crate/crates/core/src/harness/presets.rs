//! Ready-made experiments: the noise-padded blob runs, desk-scale MNIST
//! and the repeated-run comparison.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{DataConfig, ExperimentConfig, IdxFiles};
use super::network::NetworkSpec;
use crate::analysis::{two_sample_ttest, TTest};
use crate::data::NoisePlacement;
use crate::error::{Error, Result};
use crate::init::{InitSpec, MuScheme, WeightScheme};
use crate::optim::{LearningRates, TrainConfig};

/// Network configurations compared on image data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Dense,
    /// Spread foci, trained.
    FocusS,
    /// Centered foci, trained.
    FocusC,
    /// Spread foci, frozen.
    FixedS,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Dense, Variant::FocusS, Variant::FocusC, Variant::FixedS];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Dense => "dense",
            Variant::FocusS => "focus-s",
            Variant::FocusC => "focus-c",
            Variant::FixedS => "fixed-s",
        }
    }

    fn init(self, sigma0: f64) -> Option<InitSpec> {
        let mu = match self {
            Variant::Dense => return None,
            Variant::FocusS | Variant::FixedS => MuScheme::Spread { lo: 0.2, hi: 0.8 },
            Variant::FocusC => MuScheme::Center { jitter: 0.0 },
        };
        Some(InitSpec {
            weights: WeightScheme::FocusNorm,
            mu,
            sigma0,
            ..InitSpec::default()
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown variant `{s}` (dense|focus-s|focus-c|fixed-s)")))
    }
}

pub const SYNTH_EPOCHS: usize = 250;
pub const SYNTH_SIGMA0: f64 = 0.08;
/// Half-width of the random margin around the center for left-noise runs.
pub const SYNTH_CENTER_JITTER: f64 = 0.02;
/// Alternative rate for weights, biases and batchnorm in the blob runs, ten
/// times the focus-center rate. At equal rates the foci often latch onto
/// whichever input has a lucky random weight and the apertures collapse;
/// letting the weights lead makes focus seeking reliable across seeds.
pub const SYNTH_WEIGHT_LR: f64 = 1e-2;

/// 40-feature blob set (20 informative, 20 noise), four focusing neurons,
/// batchnorm, ReLU, two outputs. Data and initialization both follow `seed`.
pub fn synth_config(noise: NoisePlacement, seed: u64) -> ExperimentConfig {
    let mu = match noise {
        NoisePlacement::Left => MuScheme::Center {
            jitter: SYNTH_CENTER_JITTER,
        },
        NoisePlacement::Sides => MuScheme::Spread { lo: 0.2, hi: 0.8 },
    };
    let init = InitSpec {
        weights: WeightScheme::FocusNorm,
        mu,
        sigma0: SYNTH_SIGMA0,
        ..InitSpec::default()
    };
    let mut network = NetworkSpec::mlp(40, &[(4, Some(&init), 0.0)], 2, false);
    network
        .layers
        .retain(|l| !matches!(l, super::LayerSpec::Dropout { .. }));
    ExperimentConfig {
        data: DataConfig::Blobs {
            samples: 2000,
            informative: 20,
            classes: 2,
            noise: 20,
            placement: noise,
            test_fraction: 0.2,
            val_fraction: 0.0,
            standardize: true,
            seed,
        },
        network,
        train: TrainConfig {
            epochs: SYNTH_EPOCHS,
            batch_size: 128,
            seed,
            momentum: 0.9,
            learning_rates: LearningRates {
                general: 1e-3,
                mu: 1e-3,
                sigma: 1e-4,
            },
            log_trajectory: true,
            ..TrainConfig::default()
        },
    }
}

pub const DESK_HIDDEN: usize = 100;
pub const DESK_EPOCHS: usize = 30;
pub const DESK_TRAIN: usize = 10_000;
pub const DESK_VAL: usize = 5_000;

/// Two hidden layers (`affine - batchnorm - ReLU - dropout`, rates 0.2 and
/// 0.25) of width 100 on a 10k-image training subset. The subset is fixed;
/// `seed` drives initialization, shuffling and dropout.
pub fn mnist_desk_config(variant: Variant, seed: u64, dir: &Path) -> ExperimentConfig {
    let init = variant.init(0.1);
    let hidden = [(DESK_HIDDEN, init.as_ref(), 0.2), (DESK_HIDDEN, init.as_ref(), 0.25)];
    ExperimentConfig {
        data: DataConfig::Idx {
            dir: dir.to_path_buf(),
            files: IdxFiles::mnist(),
            train_subset: Some(DESK_TRAIN),
            val_size: DESK_VAL,
            standardize: false,
            seed: 0,
        },
        network: NetworkSpec::mlp(784, &hidden, 10, variant == Variant::FixedS),
        train: TrainConfig {
            epochs: DESK_EPOCHS,
            batch_size: 500,
            seed,
            momentum: 0.9,
            learning_rates: LearningRates {
                general: 0.1,
                mu: 0.01,
                sigma: 0.001,
            },
            ..TrainConfig::default()
        },
    }
}

/// Test accuracy (at the selected epoch) of every repeat, per variant.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub runs: Vec<(Variant, Vec<f64>)>,
}

impl Comparison {
    pub fn accuracies(&self, v: Variant) -> Option<&[f64]> {
        self.runs.iter().find(|(w, _)| *w == v).map(|(_, a)| a.as_slice())
    }

    pub fn mean(&self, v: Variant) -> Option<f64> {
        self.accuracies(v).map(|a| a.iter().sum::<f64>() / a.len() as f64)
    }

    /// Welch test of `dense - v` for each non-dense variant.
    pub fn tests(&self) -> Result<Vec<(Variant, TTest)>> {
        let Some(dense) = self.accuracies(Variant::Dense) else {
            return Ok(Vec::new());
        };
        self.runs
            .iter()
            .filter(|(v, _)| *v != Variant::Dense)
            .map(|(v, acc)| Ok((*v, two_sample_ttest(dense, acc)?)))
            .collect()
    }

    /// `variant,run,test_accuracy`
    pub fn runs_csv(&self) -> String {
        let mut out = String::from("variant,run,test_accuracy\n");
        for (v, acc) in &self.runs {
            for (k, a) in acc.iter().enumerate() {
                let _ = writeln!(out, "{},{k},{a}", v.name());
            }
        }
        out
    }

    /// `comparison,test,diff,t,p,df`
    pub fn tests_csv(&self) -> Result<String> {
        let mut out = String::from("comparison,test,diff,t,p,df\n");
        for (v, t) in self.tests()? {
            let kind = match t.kind {
                crate::analysis::TTestKind::Welch => "welch",
                crate::analysis::TTestKind::Pooled => "pooled",
            };
            let _ = writeln!(out, "dense-vs-{},{kind},{},{},{},{}", v.name(), t.diff, t.t, t.p, t.df);
        }
        Ok(out)
    }
}

/// Runs every variant `runs` times with seeds `1..=runs`.
pub fn compare(
    variants: &[Variant],
    runs: usize,
    config: impl Fn(Variant, u64) -> ExperimentConfig,
    mut progress: impl FnMut(Variant, u64, f64),
) -> Result<Comparison> {
    let mut out = Vec::new();
    for &v in variants {
        let mut acc = Vec::with_capacity(runs);
        for seed in 1..=runs as u64 {
            let (trainer, _) = config(v, seed).run()?;
            let a = trainer
                .record
                .test_at_best()
                .and_then(|m| m.accuracy)
                .ok_or_else(|| Error::invalid("comparison runs need a labelled test split"))?;
            progress(v, seed, a);
            acc.push(a);
        }
        out.push((v, acc));
    }
    Ok(Comparison { runs: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for noise in [NoisePlacement::Left, NoisePlacement::Sides] {
            let cfg = synth_config(noise, 1);
            cfg.validate().unwrap();
            assert_eq!(cfg.network.layers.len(), 4);
            assert_eq!(cfg.train.learning_rates.sigma, 0.1 * cfg.train.learning_rates.mu);
        }
        for v in Variant::ALL {
            let cfg = mnist_desk_config(v, 1, Path::new("/nonexistent"));
            cfg.validate().unwrap();
            assert_eq!(cfg.network.has_focus(), v != Variant::Dense);
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
    }

    #[test]
    fn comparison_tables() {
        let c = Comparison {
            runs: vec![
                (Variant::Dense, vec![0.9, 0.91, 0.92]),
                (Variant::FocusS, vec![0.93, 0.94, 0.95]),
            ],
        };
        let tests = c.tests().unwrap();
        assert_eq!(tests.len(), 1);
        assert!(tests[0].1.diff < 0.0);
        assert_eq!(c.runs_csv().lines().count(), 7);
        assert!(c.tests_csv().unwrap().contains("dense-vs-focus-s,welch"));
    }
}
