use std::fmt::Write as _;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::harness::{evaluate, LayerSpec, Network};
use crate::layers::{DenseLayer, Layer};

/// Nonzero connection count of every neuron in one pruned focus layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerConnections {
    pub layer: usize,
    pub inputs: usize,
    pub nonzero: Vec<usize>,
}

impl LayerConnections {
    /// Counts of neurons per equal-width bin of `[0, inputs]`.
    pub fn histogram(&self, bins: usize) -> Vec<usize> {
        let mut out = vec![0; bins.max(1)];
        for &n in &self.nonzero {
            let b = (n * out.len() / (self.inputs + 1)).min(out.len() - 1);
            out[b] += 1;
        }
        out
    }

    pub fn mean_nonzero(&self) -> f64 {
        self.nonzero.iter().sum::<usize>() as f64 / self.nonzero.len().max(1) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PruneReport {
    pub threshold: f64,
    pub zeroed: usize,
    pub total: usize,
    pub accuracy_before: Option<f64>,
    pub accuracy_after: Option<f64>,
    pub layers: Vec<LayerConnections>,
}

impl PruneReport {
    /// Zeroed fraction of focus-layer weights.
    pub fn sparsity(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.zeroed as f64 / self.total as f64
        }
    }
}

/// Replaces every focus layer by a dense layer holding `Φ ⊙ W`, with the
/// entries whose coefficient is below `t` set to zero.
pub fn prune(network: &Network, t: f64) -> Result<Network> {
    Ok(prune_with_counts(network, t)?.0)
}

fn prune_with_counts(network: &Network, t: f64) -> Result<(Network, Vec<LayerConnections>)> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("pruning threshold {t} must be >= 0")));
    }
    let mut out = network.clone();
    let mut counts = Vec::new();
    for (i, layer) in network.layers.iter().enumerate() {
        let Layer::Focus(f) = layer else { continue };
        let phi = f.coefficients()?.phi;
        let mut w = phi.hadamard(&f.weights)?;
        let mut nonzero = vec![0; f.outputs()];
        for r in 0..w.rows() {
            for c in 0..w.cols() {
                if phi.get(r, c) < t {
                    w.set(r, c, 0.0);
                } else {
                    nonzero[c] += 1;
                }
            }
        }
        counts.push(LayerConnections {
            layer: i,
            inputs: f.inputs(),
            nonzero,
        });
        out.layers[i] = Layer::Dense(DenseLayer::new(w, f.bias.clone())?);
        out.spec.layers[i] = LayerSpec::Dense {
            units: f.outputs(),
            inputs: Some(f.inputs()),
        };
    }
    Ok((out, counts))
}

/// Prunes once per threshold and scores each pruned network on `test`.
pub fn sparsity_sweep(network: &Network, thresholds: &[f64], test: &Dataset) -> Result<Vec<PruneReport>> {
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("thresholds must be sorted ascending"));
    }
    let before = evaluate(network, test)?.accuracy;
    let total: usize = network.focus_layers().map(|(_, f)| f.weights.len()).sum();
    thresholds
        .iter()
        .map(|&t| {
            let (pruned, layers) = prune_with_counts(network, t)?;
            let kept: usize = layers.iter().flat_map(|l| &l.nonzero).sum();
            Ok(PruneReport {
                threshold: t,
                zeroed: total - kept,
                total,
                accuracy_before: before,
                accuracy_after: evaluate(&pruned, test)?.accuracy,
                layers,
            })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `threshold,sparsity,zeroed,total,accuracy_before,accuracy_after`
pub fn sweep_csv(reports: &[PruneReport]) -> String {
    let mut out = String::from("threshold,sparsity,zeroed,total,accuracy_before,accuracy_after\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.threshold,
            r.sparsity(),
            r.zeroed,
            r.total,
            opt(r.accuracy_before),
            opt(r.accuracy_after)
        );
    }
    out
}

/// `threshold,layer,neuron,nonzero,inputs`
pub fn connections_csv(reports: &[PruneReport]) -> String {
    let mut out = String::from("threshold,layer,neuron,nonzero,inputs\n");
    for r in reports {
        for l in &r.layers {
            for (j, n) in l.nonzero.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{},{}", r.threshold, l.layer, j, n, l.inputs);
            }
        }
    }
    out
}

pub fn write_sweep(reports: &[PruneReport], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("sparsity_sweep.csv"), sweep_csv(reports))?;
    std::fs::write(dir.join("connections.csv"), connections_csv(reports))?;
    std::fs::write(dir.join("sparsity_sweep.svg"), super::svg::sparsity_chart(reports))?;
    Ok(())
}

/// `layer,input,neuron,weight` for every effective weight of every
/// dense or focus layer.
pub fn effective_weights_csv(network: &Network) -> Result<String> {
    let mut out = String::from("layer,input,neuron,weight\n");
    for (i, layer) in network.layers.iter().enumerate() {
        let w = match layer {
            Layer::Focus(f) => f.effective_weights()?,
            Layer::Dense(d) => d.weights.clone(),
            _ => continue,
        };
        for r in 0..w.rows() {
            for c in 0..w.cols() {
                let _ = writeln!(out, "{i},{r},{c},{:?}", w.get(r, c));
            }
        }
    }
    Ok(out)
}
