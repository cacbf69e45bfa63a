use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::network::{loss_and_grad, Network};
use crate::analysis::FociTrajectory;
use crate::data::{Dataset, Splits, Targets};
use crate::error::{Error, Result};
use crate::layers::{Layer, Mode};
use crate::numerics::Rng;
use crate::optim::{decay_lr, Sgd, TrainConfig};

const EVAL_CHUNK: usize = 2048;

/// Loss plus accuracy for classification; for regression `loss` is the MSE.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub loss: f64,
    pub accuracy: Option<f64>,
}

/// Eval-mode loss and accuracy; never mutates the network.
pub fn evaluate(network: &Network, ds: &Dataset) -> Result<Metrics> {
    if ds.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty split"));
    }
    network.check_dataset(ds)?;
    let mut loss = 0.0;
    let mut correct = 0usize;
    let idx: Vec<usize> = (0..ds.len()).collect();
    for chunk in idx.chunks(EVAL_CHUNK) {
        let part = if chunk.len() == ds.len() {
            ds.clone()
        } else {
            ds.subset(chunk)
        };
        let out = network.infer(&part.features)?;
        let (l, _) = loss_and_grad(&out, &part.targets)?;
        loss += l * chunk.len() as f64;
        if let Targets::Classes { labels, .. } = &part.targets {
            correct += out.argmax_rows().iter().zip(labels).filter(|(p, l)| p == l).count();
        }
    }
    let n = ds.len() as f64;
    Ok(Metrics {
        loss: loss / n,
        accuracy: ds.labels().map(|_| correct as f64 / n),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// Completed epochs, starting at 1.
    pub epoch: usize,
    pub train_loss: f64,
    pub val: Option<Metrics>,
    pub test: Option<Metrics>,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Epoch with the best validation accuracy (lowest loss for regression).
    BestValidation,
    /// No validation split: the last epoch.
    FinalEpoch,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub epochs: Vec<EpochRecord>,
}

impl RunRecord {
    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn selection(&self) -> Selection {
        if self.epochs.iter().any(|e| e.val.is_some()) {
            Selection::BestValidation
        } else {
            Selection::FinalEpoch
        }
    }

    /// The selected epoch; earliest wins ties.
    pub fn best(&self) -> Option<&EpochRecord> {
        match self.selection() {
            Selection::FinalEpoch => self.epochs.last(),
            Selection::BestValidation => {
                let score = |e: &EpochRecord| {
                    let v = e.val.expect("selection checked");
                    v.accuracy.unwrap_or(-v.loss)
                };
                let mut best: Option<&EpochRecord> = None;
                for e in self.epochs.iter().filter(|e| e.val.is_some()) {
                    if best.is_none_or(|b| score(e) > score(b)) {
                        best = Some(e);
                    }
                }
                best
            }
        }
    }

    pub fn test_at_best(&self) -> Option<Metrics> {
        self.best().and_then(|e| e.test)
    }

    pub fn final_test(&self) -> Option<Metrics> {
        self.epochs.last().and_then(|e| e.test)
    }

    /// Same record with wall-clock times zeroed, for determinism checks.
    pub fn without_timing(&self) -> RunRecord {
        let mut out = self.clone();
        out.epochs.iter_mut().for_each(|e| e.seconds = 0.0);
        out
    }

    pub fn write_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let mut out = String::from("epoch,train_loss,val_loss,val_accuracy,test_loss,test_accuracy,seconds\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.epoch,
                e.train_loss,
                opt(e.val.map(|m| m.loss)),
                opt(e.val.and_then(|m| m.accuracy)),
                opt(e.test.map(|m| m.loss)),
                opt(e.test.and_then(|m| m.accuracy)),
                e.seconds
            ));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Everything that evolves during training. Saving this (minus wall-clock
/// times) and reloading it resumes the run bit-exactly.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub network: Network,
    pub config: TrainConfig,
    pub optimizer: Sgd,
    pub rng: Rng,
    pub epoch: usize,
    pub record: RunRecord,
    pub trajectory: Option<FociTrajectory>,
}

impl Trainer {
    pub fn new(mut network: Network, config: TrainConfig, rng: Rng) -> Result<Self> {
        config.validate()?;
        network.set_scaler_gradient(config.scaler_gradient);
        let trajectory = if config.log_trajectory && network.focus_layers().next().is_some() {
            let mut t = FociTrajectory::default();
            t.log(&network, 0)?;
            Some(t)
        } else {
            None
        };
        Ok(Self {
            optimizer: Sgd::new(config.momentum),
            network,
            config,
            rng,
            epoch: 0,
            record: RunRecord::default(),
            trajectory,
        })
    }

    fn has_batchnorm(&self) -> bool {
        self.network.layers.iter().any(|l| matches!(l, Layer::BatchNorm(_)))
    }

    /// One pass over `train` in a seeded order, then evaluation.
    pub fn run_epoch(
        &mut self,
        train: &Dataset,
        val: Option<&Dataset>,
        test: Option<&Dataset>,
    ) -> Result<&EpochRecord> {
        self.network.check_dataset(train)?;
        let start = Instant::now();
        let rates = decay_lr(&self.config.learning_rates, &self.config.decay, self.epoch);
        let order = self.rng.permutation(train.len());
        let skip_singletons = self.has_batchnorm();
        let mut total = 0.0;
        let mut seen = 0usize;
        for (b, idx) in order.chunks(self.config.batch_size).enumerate() {
            // batch statistics are undefined for one sample
            if skip_singletons && idx.len() < 2 {
                continue;
            }
            let batch = train.subset(idx);
            let loss = self
                .network
                .loss_and_backward(&batch.features, &batch.targets, Mode::Train, &mut self.rng)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: self.epoch + 1,
                    batch: b + 1,
                });
            }
            self.optimizer.step(self.network.param_slots(), &rates)?;
            self.network.clip_focus(&self.config.clip);
            total += loss * idx.len() as f64;
            seen += idx.len();
        }
        self.epoch += 1;
        let val = val.map(|d| evaluate(&self.network, d)).transpose()?;
        let test = test.map(|d| evaluate(&self.network, d)).transpose()?;
        if let Some(t) = &mut self.trajectory {
            t.log(&self.network, self.epoch)?;
        }
        self.record.epochs.push(EpochRecord {
            epoch: self.epoch,
            train_loss: if seen > 0 { total / seen as f64 } else { f64::NAN },
            val,
            test,
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(self.record.epochs.last().expect("just pushed"))
    }

    /// Runs the remaining epochs up to `config.epochs`.
    pub fn fit(&mut self, splits: &Splits) -> Result<()> {
        let val = (!splits.val.is_empty()).then_some(&splits.val);
        let test = (!splits.test.is_empty()).then_some(&splits.test);
        while self.epoch < self.config.epochs {
            self.run_epoch(&splits.train, val, test)?;
        }
        Ok(())
    }
}

/// Trains `network` under `config`, seeding the shuffle and dropout stream
/// from `config.seed`.
pub fn train(network: Network, splits: &Splits, config: &TrainConfig) -> Result<Trainer> {
    let mut trainer = Trainer::new(network, config.clone(), Rng::new(config.seed))?;
    trainer.fit(splits)?;
    Ok(trainer)
}
