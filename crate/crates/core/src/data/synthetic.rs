use serde::{Deserialize, Serialize};

use super::{Dataset, Targets};
use crate::error::{Error, Result};
use crate::numerics::{sample_normal, Matrix, Rng};

/// Minimum distance between any two class means; closer draws are resampled
/// so the informative block stays well separated.
pub const MIN_MEAN_SEPARATION: f64 = 3.5;

/// Where the noise columns go relative to the informative block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePlacement {
    /// `[noise | informative]`
    Left,
    /// `[noise/2 | informative | noise/2]`
    Sides,
}

impl std::str::FromStr for NoisePlacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(NoisePlacement::Left),
            "sides" => Ok(NoisePlacement::Sides),
            other => Err(Error::invalid(format!(
                "unknown noise placement `{other}` (left|sides)"
            ))),
        }
    }
}

/// Gaussian blobs: per class, one mean per feature drawn from `N(0, 1)`;
/// samples are the class mean plus `N(0, 1)` noise. Label of sample `i` is
/// `i % classes`, so classes are balanced to within one sample.
pub fn make_blobs(n_samples: usize, n_informative: usize, classes: usize, rng: &mut Rng) -> Result<Dataset> {
    if n_informative == 0 {
        return Err(Error::invalid("need at least one informative feature"));
    }
    if classes < 2 || n_samples < classes {
        return Err(Error::invalid(format!(
            "need classes >= 2 and n_samples >= classes, got {n_samples} samples for {classes} classes"
        )));
    }
    let mut means = sample_normal(rng, 0.0, 1.0, classes, n_informative)?;
    let mut attempts = 0;
    while min_pairwise_distance(&means) < MIN_MEAN_SEPARATION {
        attempts += 1;
        if attempts > 1000 {
            return Err(Error::invalid(format!(
                "could not draw class means {MIN_MEAN_SEPARATION} apart in {n_informative} dimensions"
            )));
        }
        means = sample_normal(rng, 0.0, 1.0, classes, n_informative)?;
    }
    let labels: Vec<usize> = (0..n_samples).map(|i| i % classes).collect();
    let mut features = Matrix::zeros(n_samples, n_informative);
    for (r, &label) in labels.iter().enumerate() {
        for c in 0..n_informative {
            features.set(r, c, means.get(label, c) + rng.standard_normal());
        }
    }
    Dataset::new(features, Targets::Classes { labels, classes })
}

fn min_pairwise_distance(means: &Matrix) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..means.rows() {
        for b in a + 1..means.rows() {
            let d: f64 = means
                .row(a)
                .iter()
                .zip(means.row(b))
                .map(|(x, y)| (x - y).powi(2))
                .sum();
            best = best.min(d.sqrt());
        }
    }
    best
}

/// Adds `n_noise` independent `N(0, 1)` columns around the existing features.
pub fn pad_noise(ds: &Dataset, n_noise: usize, placement: NoisePlacement, rng: &mut Rng) -> Result<Dataset> {
    let n = ds.len();
    let features = match placement {
        NoisePlacement::Left => {
            let noise = sample_normal(rng, 0.0, 1.0, n, n_noise)?;
            noise.hstack(&ds.features)?
        }
        NoisePlacement::Sides => {
            if !n_noise.is_multiple_of(2) {
                return Err(Error::invalid(format!(
                    "sides placement needs an even noise count, got {n_noise}"
                )));
            }
            let left = sample_normal(rng, 0.0, 1.0, n, n_noise / 2)?;
            let right = sample_normal(rng, 0.0, 1.0, n, n_noise / 2)?;
            left.hstack(&ds.features)?.hstack(&right)?
        }
    };
    Dataset::new(features, ds.targets.clone())
}
