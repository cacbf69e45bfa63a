//! Seedable random source.
//!
//! Every stochastic choice in the crate (initialization, shuffling, dropout
//! masks, synthetic data) draws from [`Rng`], a thin wrapper over ChaCha8
//! (`rand_chacha::ChaCha8Rng`). ChaCha8 output is specified independently of
//! platform and word size, so a given seed reproduces the same stream
//! everywhere. The generator position is exposed through [`RngState`] so a
//! checkpoint can resume the exact stream.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

/// Serializable generator position: seed, ChaCha stream id, and word offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub stream: u64,
    pub word_pos: u128,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child generator, advancing this one.
    pub fn fork(&mut self) -> Rng {
        Rng::new(self.inner.next_u64())
    }

    pub fn state(&self) -> RngState {
        RngState {
            seed: self.seed,
            stream: self.inner.get_stream(),
            word_pos: self.inner.get_word_pos(),
        }
    }

    pub fn from_state(state: RngState) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(state.seed);
        inner.set_stream(state.stream);
        inner.set_word_pos(state.word_pos);
        Self {
            seed: state.seed,
            inner,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform in `[lo, hi)`; returns `lo` when the interval is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// A random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}

pub fn sample_uniform(rng: &mut Rng, lo: f64, hi: f64, rows: usize, cols: usize) -> Result<Matrix> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!(
            "uniform bounds must satisfy lo <= hi, got [{lo}, {hi})"
        )));
    }
    Ok(Matrix::from_fn(rows, cols, |_, _| rng.uniform(lo, hi)))
}

pub fn sample_normal(rng: &mut Rng, mean: f64, std: f64, rows: usize, cols: usize) -> Result<Matrix> {
    if !(std >= 0.0) || !mean.is_finite() || !std.is_finite() {
        return Err(Error::invalid(format!("normal std must be finite and >= 0, got {std}")));
    }
    Ok(Matrix::from_fn(rows, cols, |_, _| mean + std * rng.standard_normal()))
}
