//! Experiment configuration files (TOML) and dataset preparation.
//!
//! ```toml
//! [data]
//! source = "blobs"          # or "idx", "csv"
//! placement = "left"
//!
//! [network]
//! inputs = 40
//! [[network.layers]]
//! kind = "focus"
//! units = 4
//! init = { sigma0 = 0.08, mu = { kind = "center", jitter = 0.02 } }
//! [[network.layers]]
//! kind = "batch-norm"
//! [[network.layers]]
//! kind = "relu"
//! [[network.layers]]
//! kind = "dense"
//! units = 2
//!
//! [train]
//! epochs = 250
//! batch_size = 128
//! seed = 1
//! momentum = 0.9
//! learning_rates = { general = 1e-3, mu = 1e-3, sigma = 1e-4 }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::network::{Network, NetworkSpec};
use super::train::Trainer;
use crate::data::{idx_subset, load_csv, make_blobs, pad_noise, read_idx_images, read_idx_labels, split};
use crate::data::{Dataset, NoisePlacement, Splits, Task};
use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::optim::TrainConfig;

/// Environment variable overriding the default MNIST directory.
pub const MNIST_DIR_ENV: &str = "FOCUSNET_MNIST_DIR";

/// `$FOCUSNET_MNIST_DIR`, else `data/mnist` under the workspace root.
pub fn default_mnist_dir() -> PathBuf {
    std::env::var_os(MNIST_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

/// True when the four standard MNIST files are present in `dir`.
pub fn mnist_available(dir: &Path) -> bool {
    IdxFiles::mnist().paths(dir).iter().all(|p| p.is_file())
}

fn d2000() -> usize {
    2000
}
fn d20() -> usize {
    20
}
fn d2() -> usize {
    2
}
fn d_test() -> f64 {
    0.2
}
fn d_val_csv() -> f64 {
    0.1
}
fn d_true() -> bool {
    true
}
fn d_val_idx() -> usize {
    5000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdxFiles {
    pub train_images: String,
    pub train_labels: String,
    pub test_images: String,
    pub test_labels: String,
}

impl IdxFiles {
    pub fn mnist() -> Self {
        Self {
            train_images: "train-images-idx3-ubyte".into(),
            train_labels: "train-labels-idx1-ubyte".into(),
            test_images: "t10k-images-idx3-ubyte".into(),
            test_labels: "t10k-labels-idx1-ubyte".into(),
        }
    }

    fn paths(&self, dir: &Path) -> [PathBuf; 4] {
        [
            dir.join(&self.train_images),
            dir.join(&self.train_labels),
            dir.join(&self.test_images),
            dir.join(&self.test_labels),
        ]
    }
}

impl Default for IdxFiles {
    fn default() -> Self {
        Self::mnist()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataConfig {
    /// Noise-padded Gaussian blobs.
    Blobs {
        #[serde(default = "d2000")]
        samples: usize,
        #[serde(default = "d20")]
        informative: usize,
        #[serde(default = "d2")]
        classes: usize,
        #[serde(default = "d20")]
        noise: usize,
        placement: NoisePlacement,
        #[serde(default = "d_test")]
        test_fraction: f64,
        #[serde(default)]
        val_fraction: f64,
        #[serde(default = "d_true")]
        standardize: bool,
        #[serde(default)]
        seed: u64,
    },
    /// IDX image files. Validation images come out of the training file;
    /// the test file is used whole.
    Idx {
        dir: PathBuf,
        #[serde(default)]
        files: IdxFiles,
        /// Training images to keep after the validation split (all if absent).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        train_subset: Option<usize>,
        #[serde(default = "d_val_idx")]
        val_size: usize,
        #[serde(default)]
        standardize: bool,
        #[serde(default)]
        seed: u64,
    },
    Csv {
        path: PathBuf,
        target: String,
        #[serde(default)]
        task: Task,
        #[serde(default = "d_test")]
        test_fraction: f64,
        #[serde(default = "d_val_csv")]
        val_fraction: f64,
        #[serde(default = "d_true")]
        standardize: bool,
        #[serde(default)]
        seed: u64,
    },
}

/// Splits `ds` into test (fraction of all), validation (fraction of all),
/// and the rest for training.
fn three_way(ds: &Dataset, test_fraction: f64, val_fraction: f64, rng: &mut Rng) -> Result<Splits> {
    if test_fraction + val_fraction >= 1.0 {
        return Err(Error::Config("test_fraction + val_fraction must be < 1".into()));
    }
    let (rest, test) = split(ds, test_fraction, rng)?;
    let (train, val) = split(&rest, val_fraction / (1.0 - test_fraction), rng)?;
    Ok(Splits {
        train,
        val,
        test,
        standardization: None,
    })
}

impl DataConfig {
    pub fn load(&self) -> Result<Splits> {
        let (mut splits, standardize) = match self {
            DataConfig::Blobs {
                samples,
                informative,
                classes,
                noise,
                placement,
                test_fraction,
                val_fraction,
                standardize,
                seed,
            } => {
                let mut rng = Rng::new(*seed);
                let blobs = make_blobs(*samples, *informative, *classes, &mut rng)?;
                let ds = pad_noise(&blobs, *noise, *placement, &mut rng)?;
                (three_way(&ds, *test_fraction, *val_fraction, &mut rng)?, *standardize)
            }
            DataConfig::Idx {
                dir,
                files,
                train_subset,
                val_size,
                standardize,
                seed,
            } => {
                let [tri, trl, tei, tel] = files.paths(dir);
                let images = read_idx_images(tri)?;
                let labels = read_idx_labels(trl)?;
                if *val_size >= images.count {
                    return Err(Error::Config(format!(
                        "val_size {val_size} leaves no training images out of {}",
                        images.count
                    )));
                }
                let perm = Rng::new(*seed).permutation(images.count);
                let (val_idx, rest) = perm.split_at(*val_size);
                let train_idx = match train_subset {
                    Some(n) => &rest[..(*n).min(rest.len())],
                    None => rest,
                };
                let test_images = read_idx_images(tei)?;
                let test_labels = read_idx_labels(tel)?;
                let all: Vec<usize> = (0..test_images.count).collect();
                let splits = Splits {
                    train: idx_subset(&images, &labels, train_idx)?,
                    val: idx_subset(&images, &labels, val_idx)?,
                    test: idx_subset(&test_images, &test_labels, &all)?,
                    standardization: None,
                };
                (splits, *standardize)
            }
            DataConfig::Csv {
                path,
                target,
                task,
                test_fraction,
                val_fraction,
                standardize,
                seed,
            } => {
                let ds = load_csv(path, target, *task)?;
                let mut rng = Rng::new(*seed);
                (three_way(&ds, *test_fraction, *val_fraction, &mut rng)?, *standardize)
            }
        };
        if standardize {
            splits.standardize()?;
        }
        Ok(splits)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    pub network: NetworkSpec,
    pub train: TrainConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.train.validate()
    }

    /// Loads the data and builds an untrained network plus trainer. The
    /// network is initialized from `train.seed`; the same stream then
    /// drives shuffling and dropout.
    pub fn prepare(&self) -> Result<(Trainer, Splits)> {
        self.validate()?;
        let splits = self.data.load()?;
        let mut rng = Rng::new(self.train.seed);
        let network = Network::build(&self.network, &self.train.clip, &mut rng)?;
        network.check_dataset(&splits.train)?;
        Ok((Trainer::new(network, self.train.clone(), rng)?, splits))
    }

    pub fn run(&self) -> Result<(Trainer, Splits)> {
        let (mut trainer, splits) = self.prepare()?;
        trainer.fit(&splits)?;
        Ok((trainer, splits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
[data]
source = "blobs"
samples = 200
placement = "sides"

[network]
inputs = 40
[[network.layers]]
kind = "focus"
units = 4
init = { sigma0 = 0.08, mu = { kind = "spread", lo = 0.2, hi = 0.8 } }
[[network.layers]]
kind = "batch-norm"
[[network.layers]]
kind = "relu"
[[network.layers]]
kind = "dense"
units = 2

[train]
epochs = 2
batch_size = 32
seed = 1
momentum = 0.9
learning_rates = { general = 1e-3, mu = 1e-3, sigma = 1e-4 }
"#;

    #[test]
    fn parses_and_runs() {
        let cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        let (trainer, splits) = cfg.run().unwrap();
        assert_eq!(trainer.epoch, 2);
        assert_eq!(splits.train.len() + splits.test.len(), 200);
        assert!(splits.val.is_empty());
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = EXAMPLE.replace("momentum = 0.9", "momentum = 0.9\nmomentun = 0.8");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let bad = EXAMPLE.replace("inputs = 40", "inputs = 39");
        let cfg = ExperimentConfig::from_toml(&bad).unwrap();
        assert!(cfg.prepare().is_err());
    }
}
