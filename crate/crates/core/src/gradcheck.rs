//! Central finite-difference checks for every backward pass.
//!
//! Each suite builds small random networks, computes the analytic gradient
//! of the training loss with respect to every parameter and the input, and
//! compares it entry by entry against `(L(θ+h) − L(θ−h)) / 2h`.

use std::collections::BTreeMap;
use std::fmt;

use crate::data::Targets;
use crate::error::Result;
use crate::focus::FocusParams;
use crate::harness::{loss_and_grad, LayerSpec, Network, NetworkSpec};
use crate::init::InitSpec;
use crate::layers::{
    mse, softmax_cross_entropy, BatchNormLayer, DenseLayer, DropoutLayer, FocusLayer, Layer, Mode, ReluLayer,
    BATCHNORM_EPSILON, BATCHNORM_MOMENTUM,
};
use crate::numerics::{sample_normal, sample_uniform, Matrix, Rng};

pub const STEP: f64 = 1e-6;
pub const TOLERANCE: f64 = 1e-4;
pub const TRIALS: usize = 20;

/// `|a − n| / (|a| + |n|)`, with the denominator floored at `1e-5` and at
/// `1e-3 · scale`. `scale` is the largest analytic magnitude in the tensor,
/// so entries three orders below it are judged on an absolute scale where
/// difference noise would otherwise dominate.
pub fn relative_error(analytic: f64, numeric: f64, scale: f64) -> f64 {
    let floor = (1e-3 * scale).max(1e-5);
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(floor)
}

fn scale(grads: &[f64]) -> f64 {
    grads.iter().fold(0.0, |m, g| m.max(g.abs()))
}

/// Worst relative error seen for one kind of gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub checked: usize,
    pub max_error: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradCheckReport {
    pub suites: Vec<SuiteResult>,
}

impl GradCheckReport {
    pub fn max_error(&self) -> f64 {
        self.suites.iter().map(|s| s.max_error).fold(0.0, f64::max)
    }

    pub fn passed(&self, tolerance: f64) -> bool {
        self.suites.iter().all(|s| s.max_error < tolerance)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }

    fn merge(&mut self, prefix: &str, errors: &BTreeMap<String, (usize, f64)>) {
        for (name, &(checked, max_error)) in errors {
            let name = format!("{prefix}.{name}");
            match self.suites.iter_mut().find(|s| s.name == name) {
                Some(s) => {
                    s.checked += checked;
                    s.max_error = s.max_error.max(max_error);
                }
                None => self.suites.push(SuiteResult {
                    name,
                    checked,
                    max_error,
                }),
            }
        }
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(
                f,
                "{:<28} {:>7} entries  max rel err {:.3e}",
                s.name, s.checked, s.max_error
            )?;
        }
        Ok(())
    }
}

fn loss_at(net: &Network, x: &Matrix, targets: &Targets) -> Result<f64> {
    let mut net = net.clone();
    // a fresh stream per evaluation keeps dropout masks identical
    let out = net.forward(x, Mode::Train, &mut Rng::new(0))?;
    Ok(loss_and_grad(&out, targets)?.0)
}

fn record(errors: &mut BTreeMap<String, (usize, f64)>, name: &str, err: f64) {
    let e = errors.entry(name.to_string()).or_insert((0, 0.0));
    e.0 += 1;
    e.1 = e.1.max(err);
}

/// Compares analytic and numeric gradients of the mean training loss for
/// every parameter tensor and the input. Keys are parameter names without
/// the layer index (`weights`, `mu`, ..., `input`).
pub fn check_network(net: &Network, x: &Matrix, targets: &Targets, h: f64) -> Result<BTreeMap<String, (usize, f64)>> {
    let mut analytic_net = net.clone();
    let out = analytic_net.forward(x, Mode::Train, &mut Rng::new(0))?;
    let (_, dout) = loss_and_grad(&out, targets)?;
    let dx = analytic_net.backward_input(&dout)?;
    let analytic: Vec<(String, Vec<f64>)> = analytic_net
        .param_slots()
        .into_iter()
        .map(|s| (s.name, s.grads.to_vec()))
        .collect();

    let mut errors = BTreeMap::new();
    let mut probe = net.clone();
    for (k, (name, grads)) in analytic.iter().enumerate() {
        let short = name.split_once('.').map_or(name.as_str(), |(_, p)| p);
        for (i, &a) in grads.iter().enumerate() {
            let v = probe.param_slots()[k].values[i];
            probe.param_slots()[k].values[i] = v + h;
            let up = loss_at(&probe, x, targets)?;
            probe.param_slots()[k].values[i] = v - h;
            let down = loss_at(&probe, x, targets)?;
            probe.param_slots()[k].values[i] = v;
            record(
                &mut errors,
                short,
                relative_error(a, (up - down) / (2.0 * h), scale(grads)),
            );
        }
    }
    let mut xp = x.clone();
    for i in 0..x.len() {
        let v = x.as_slice()[i];
        xp.as_mut_slice()[i] = v + h;
        let up = loss_at(net, &xp, targets)?;
        xp.as_mut_slice()[i] = v - h;
        let down = loss_at(net, &xp, targets)?;
        xp.as_mut_slice()[i] = v;
        let n = (up - down) / (2.0 * h);
        record(
            &mut errors,
            "input",
            relative_error(dx.as_slice()[i], n, scale(dx.as_slice())),
        );
    }
    Ok(errors)
}

fn random_labels(n: usize, classes: usize, rng: &mut Rng) -> Targets {
    Targets::Classes {
        labels: (0..n).map(|_| rng.below(classes)).collect(),
        classes,
    }
}

fn random_focus(m: usize, n: usize, rng: &mut Rng) -> Result<FocusLayer> {
    let w = sample_uniform(rng, -1.0, 1.0, m, n)?;
    let b = (0..n).map(|_| rng.uniform(-0.5, 0.5)).collect();
    let mu = (0..n).map(|_| rng.uniform(0.0, 1.0)).collect();
    let sigma = (0..n).map(|_| rng.uniform(0.05, 0.5)).collect();
    FocusLayer::new(w, b, FocusParams::new(mu, sigma, m)?)
}

fn random_dense(m: usize, n: usize, rng: &mut Rng) -> Result<DenseLayer> {
    let w = sample_uniform(rng, -1.0, 1.0, m, n)?;
    DenseLayer::new(w, (0..n).map(|_| rng.uniform(-0.5, 0.5)).collect())
}

fn focus_spec(m: usize, n: usize) -> LayerSpec {
    LayerSpec::Focus {
        units: n,
        inputs: Some(m),
        init: InitSpec::default(),
        frozen: false,
    }
}

fn dense_spec(m: usize, n: usize) -> LayerSpec {
    LayerSpec::Dense {
        units: n,
        inputs: Some(m),
    }
}

fn network(inputs: usize, parts: Vec<(LayerSpec, Layer)>) -> Network {
    let (specs, layers) = parts.into_iter().unzip();
    Network {
        spec: NetworkSpec { inputs, layers: specs },
        layers,
    }
}

/// Single focusing layers with m in [5, 20], n in [2, 8], batch in [1, 8],
/// softmax cross-entropy directly on the layer outputs.
pub fn check_focus_layers(trials: usize, rng: &mut Rng) -> Result<GradCheckReport> {
    let mut report = GradCheckReport::default();
    for _ in 0..trials {
        let m = 5 + rng.below(16);
        let n = 2 + rng.below(7);
        let batch = 1 + rng.below(8);
        let layer = random_focus(m, n, rng)?;
        let net = network(m, vec![(focus_spec(m, n), Layer::Focus(layer))]);
        let x = sample_normal(rng, 0.0, 1.0, batch, m)?;
        let t = random_labels(batch, n, rng);
        report.merge("focus", &check_network(&net, &x, &t, STEP)?);
    }
    Ok(report)
}

pub fn check_dense_layers(trials: usize, rng: &mut Rng) -> Result<GradCheckReport> {
    let mut report = GradCheckReport::default();
    for _ in 0..trials {
        let m = 2 + rng.below(10);
        let n = 2 + rng.below(6);
        let batch = 1 + rng.below(8);
        let net = network(m, vec![(dense_spec(m, n), Layer::Dense(random_dense(m, n, rng)?))]);
        let x = sample_normal(rng, 0.0, 1.0, batch, m)?;
        let t = random_labels(batch, n, rng);
        report.merge("dense", &check_network(&net, &x, &t, STEP)?);
    }
    Ok(report)
}

/// Batchnorm (train mode, batch statistics) followed by a dense readout.
pub fn check_batchnorm(trials: usize, rng: &mut Rng) -> Result<GradCheckReport> {
    let mut report = GradCheckReport::default();
    for _ in 0..trials {
        let m = 2 + rng.below(8);
        let n = 2 + rng.below(4);
        let batch = 2 + rng.below(7);
        let mut bn = BatchNormLayer::new(m, BATCHNORM_MOMENTUM, BATCHNORM_EPSILON)?;
        bn.gamma = (0..m).map(|_| rng.uniform(0.5, 1.5)).collect();
        bn.beta = (0..m).map(|_| rng.uniform(-0.5, 0.5)).collect();
        let net = network(
            m,
            vec![
                (LayerSpec::batch_norm(), Layer::BatchNorm(bn)),
                (dense_spec(m, n), Layer::Dense(random_dense(m, n, rng)?)),
            ],
        );
        let x = sample_normal(rng, 0.5, 2.0, batch, m)?;
        let t = random_labels(batch, n, rng);
        report.merge("batchnorm", &check_network(&net, &x, &t, STEP)?);
    }
    Ok(report)
}

/// Inverted dropout with a fixed mask, then a dense readout.
pub fn check_dropout(trials: usize, rng: &mut Rng) -> Result<GradCheckReport> {
    let mut report = GradCheckReport::default();
    for _ in 0..trials {
        let m = 2 + rng.below(8);
        let n = 2 + rng.below(4);
        let batch = 1 + rng.below(8);
        let net = network(
            m,
            vec![
                (
                    LayerSpec::Dropout { rate: 0.3 },
                    Layer::Dropout(DropoutLayer::new(0.3)?),
                ),
                (dense_spec(m, n), Layer::Dense(random_dense(m, n, rng)?)),
            ],
        );
        let x = sample_normal(rng, 0.0, 1.0, batch, m)?;
        let t = random_labels(batch, n, rng);
        report.merge("dropout", &check_network(&net, &x, &t, STEP)?);
    }
    Ok(report)
}

fn check_loss(
    trials: usize,
    rng: &mut Rng,
    name: &str,
    mut case: impl FnMut(&mut Rng) -> Result<(Matrix, Box<dyn Fn(&Matrix) -> Result<(f64, Matrix)>>)>,
) -> Result<GradCheckReport> {
    let mut errors = BTreeMap::new();
    for _ in 0..trials {
        let (mut z, loss) = case(rng)?;
        let (_, grad) = loss(&z)?;
        for i in 0..z.len() {
            let v = z.as_slice()[i];
            z.as_mut_slice()[i] = v + STEP;
            let up = loss(&z)?.0;
            z.as_mut_slice()[i] = v - STEP;
            let down = loss(&z)?.0;
            z.as_mut_slice()[i] = v;
            let n = (up - down) / (2.0 * STEP);
            record(
                &mut errors,
                "logits",
                relative_error(grad.as_slice()[i], n, scale(grad.as_slice())),
            );
        }
    }
    let mut report = GradCheckReport::default();
    report.merge(name, &errors);
    Ok(report)
}

pub fn check_softmax_cross_entropy(trials: usize, rng: &mut Rng) -> Result<GradCheckReport> {
    check_loss(trials, rng, "softmax-ce", |rng| {
        let batch = 1 + rng.below(8);
        let classes = 2 + rng.below(9);
        let z = sample_normal(rng, 0.0, 3.0, batch, classes)?;
        let labels: Vec<usize> = (0..batch).map(|_| rng.below(classes)).collect();
        Ok((z, Box::new(move |z: &Matrix| softmax_cross_entropy(z, &labels))))
    })
}

pub fn check_mse(trials: usize, rng: &mut Rng) -> Result<GradCheckReport> {
    check_loss(trials, rng, "mse", |rng| {
        let batch = 1 + rng.below(8);
        let cols = 1 + rng.below(4);
        let z = sample_normal(rng, 0.0, 1.0, batch, cols)?;
        let target = sample_normal(rng, 0.0, 1.0, batch, cols)?;
        Ok((z, Box::new(move |z: &Matrix| mse(z, &target))))
    })
}

/// Two focusing blocks (`focus - batchnorm - ReLU - dropout`) and a dense
/// readout, end to end. Widths and batch sizes are kept large enough that
/// no batchnorm column goes constant, and beta is kept off zero, so the
/// ReLU kinks stay out of reach of the difference step.
pub fn check_full_network(trials: usize, rng: &mut Rng) -> Result<GradCheckReport> {
    let mut report = GradCheckReport::default();
    for _ in 0..trials {
        let m = 8 + rng.below(8);
        let h1 = 6 + rng.below(4);
        let h2 = 3 + rng.below(4);
        let out = 2 + rng.below(3);
        let batch = 4 + rng.below(5);
        let mut bn = |w: usize| -> Result<Layer> {
            let mut l = BatchNormLayer::new(w, BATCHNORM_MOMENTUM, BATCHNORM_EPSILON)?;
            l.gamma = (0..w).map(|_| rng.uniform(0.5, 1.5)).collect();
            l.beta = (0..w)
                .map(|_| rng.uniform(0.1, 0.5) * if rng.below(2) == 0 { -1.0 } else { 1.0 })
                .collect();
            Ok(Layer::BatchNorm(l))
        };
        let (bn1, bn2) = (bn(h1)?, bn(h2)?);
        let net = network(
            m,
            vec![
                (focus_spec(m, h1), Layer::Focus(random_focus(m, h1, rng)?)),
                (LayerSpec::batch_norm(), bn1),
                (LayerSpec::Relu, Layer::Relu(ReluLayer::new())),
                (
                    LayerSpec::Dropout { rate: 0.2 },
                    Layer::Dropout(DropoutLayer::new(0.2)?),
                ),
                (focus_spec(h1, h2), Layer::Focus(random_focus(h1, h2, rng)?)),
                (LayerSpec::batch_norm(), bn2),
                (LayerSpec::Relu, Layer::Relu(ReluLayer::new())),
                (dense_spec(h2, out), Layer::Dense(random_dense(h2, out, rng)?)),
            ],
        );
        let x = sample_normal(rng, 0.0, 1.0, batch, m)?;
        let t = random_labels(batch, out, rng);
        report.merge("network", &check_network(&net, &x, &t, STEP)?);
    }
    Ok(report)
}

/// Every suite with `trials` random cases each.
pub fn run_all(trials: usize, seed: u64) -> Result<GradCheckReport> {
    let mut rng = Rng::new(seed);
    let mut report = GradCheckReport::default();
    for part in [
        check_focus_layers(trials, &mut rng)?,
        check_dense_layers(trials, &mut rng)?,
        check_batchnorm(trials, &mut rng)?,
        check_dropout(trials, &mut rng)?,
        check_softmax_cross_entropy(trials, &mut rng)?,
        check_mse(trials, &mut rng)?,
        check_full_network(trials, &mut rng)?,
    ] {
        report.suites.extend(part.suites);
    }
    Ok(report)
}
