//! Datasets: synthetic blobs, IDX image files, CSV tables, standardization
//! and seeded splits.

mod csv;
mod idx;
mod synthetic;

pub use self::csv::{load_csv, write_csv};
pub use idx::{idx_subset, load_idx, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels, IdxImages};
pub use synthetic::{make_blobs, pad_noise, NoisePlacement};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    #[default]
    Classification,
    Regression,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Targets {
    Classes { labels: Vec<usize>, classes: usize },
    Values(Vec<f64>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Classes { labels, .. } => labels.len(),
            Targets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            Targets::Classes { .. } => Task::Classification,
            Targets::Values(_) => Task::Regression,
        }
    }

    fn select(&self, indices: &[usize]) -> Targets {
        match self {
            Targets::Classes { labels, classes } => Targets::Classes {
                labels: indices.iter().map(|&i| labels[i]).collect(),
                classes: *classes,
            },
            Targets::Values(v) => Targets::Values(indices.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Samples as rows of `features`, one target per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub targets: Targets,
}

impl Dataset {
    pub fn new(features: Matrix, targets: Targets) -> Result<Self> {
        if features.rows() != targets.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} targets",
                features.rows(),
                targets.len()
            )));
        }
        if let Targets::Classes { labels, classes } = &targets {
            if let Some(bad) = labels.iter().find(|&&l| l >= *classes) {
                return Err(Error::invalid(format!("label {bad} >= class count {classes}")));
            }
        }
        Ok(Self { features, targets })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        match &self.targets {
            Targets::Classes { labels, .. } => Some(labels),
            Targets::Values(_) => None,
        }
    }

    pub fn classes(&self) -> Option<usize> {
        match &self.targets {
            Targets::Classes { classes, .. } => Some(*classes),
            Targets::Values(_) => None,
        }
    }

    pub fn task(&self) -> Task {
        self.targets.task()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            targets: self.targets.select(indices),
        }
    }

    /// The first `n` samples (or all of them).
    pub fn head(&self, n: usize) -> Dataset {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.subset(&idx)
    }
}

/// Per-column affine standardization fitted on a training split.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    /// Columns whose standard deviation is (numerically) zero get `std = 1`.
    pub fn fit(features: &Matrix) -> Self {
        let mean = features.column_means();
        let std = features
            .column_variances()
            .into_iter()
            .map(|v| {
                let s = v.sqrt();
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix> {
        if features.cols() != self.mean.len() {
            return Err(Error::ShapeMismatch {
                op: "standardize",
                left: features.shape(),
                right: (features.rows(), self.mean.len()),
            });
        }
        let mut out = features.clone();
        for r in 0..out.rows() {
            for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.mean[c]) / self.std[c];
            }
        }
        Ok(out)
    }
}

/// Train / validation / test partition of one source.
#[derive(Clone, Debug)]
pub struct Splits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
    pub standardization: Option<Standardization>,
}

impl Splits {
    /// Fits standardization on `train` and applies it to every split.
    pub fn standardize(&mut self) -> Result<()> {
        let stats = Standardization::fit(&self.train.features);
        self.apply_standardization(stats)
    }

    pub fn apply_standardization(&mut self, stats: Standardization) -> Result<()> {
        for ds in [&mut self.train, &mut self.val, &mut self.test] {
            ds.features = stats.apply(&ds.features)?;
        }
        self.standardization = Some(stats);
        Ok(())
    }
}

/// Seeded shuffle, then partition into `(rest, held_out)` with
/// `round(fraction * n)` held-out samples.
pub fn split(ds: &Dataset, fraction: f64, rng: &mut Rng) -> Result<(Dataset, Dataset)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid(format!("split fraction {fraction} outside [0, 1]")));
    }
    let perm = rng.permutation(ds.len());
    let held = (fraction * ds.len() as f64).round() as usize;
    let (held_idx, rest_idx) = perm.split_at(held);
    Ok((ds.subset(rest_idx), ds.subset(held_idx)))
}
