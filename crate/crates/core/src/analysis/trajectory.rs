use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::Network;

#[derive(Clone, Debug, PartialEq)]
pub struct LayerFoci {
    pub layer: usize,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FociSnapshot {
    pub epoch: usize,
    pub layers: Vec<LayerFoci>,
}

/// Per-epoch `(mu, sigma)` of every focusing neuron.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FociTrajectory {
    pub snapshots: Vec<FociSnapshot>,
}

impl FociTrajectory {
    pub fn log(&mut self, network: &Network, epoch: usize) -> Result<()> {
        let layers: Vec<LayerFoci> = network
            .focus_layers()
            .map(|(i, f)| LayerFoci {
                layer: i,
                mu: f.focus.mu.clone(),
                sigma: f.focus.sigma.clone(),
            })
            .collect();
        if layers.is_empty() {
            return Err(Error::invalid("network has no focusing layers to log"));
        }
        self.snapshots.push(FociSnapshot { epoch, layers });
        Ok(())
    }

    pub fn first(&self) -> Option<&FociSnapshot> {
        self.snapshots.first()
    }

    pub fn last(&self) -> Option<&FociSnapshot> {
        self.snapshots.last()
    }

    /// `epoch,layer,neuron,mu,sigma`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,layer,neuron,mu,sigma\n");
        for s in &self.snapshots {
            for l in &s.layers {
                for (j, (m, sg)) in l.mu.iter().zip(&l.sigma).enumerate() {
                    let _ = writeln!(out, "{},{},{},{},{}", s.epoch, l.layer, j, m, sg);
                }
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// One polyline per neuron in the `(mu, sigma)` plane for focus layer
    /// `layer`; square marks the start, triangle the end.
    pub fn to_svg(&self, layer: usize) -> Result<String> {
        let paths = self.neuron_paths(layer)?;
        Ok(super::svg::trajectory_plot(
            &paths,
            &format!("foci trajectory, layer {layer}"),
        ))
    }

    pub fn write_svg(&self, layer: usize, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_svg(layer)?)?;
        Ok(())
    }

    /// Sequence of `(mu, sigma)` points per neuron of one layer.
    pub fn neuron_paths(&self, layer: usize) -> Result<Vec<Vec<(f64, f64)>>> {
        let mut paths: Vec<Vec<(f64, f64)>> = Vec::new();
        for s in &self.snapshots {
            let l = s
                .layers
                .iter()
                .find(|l| l.layer == layer)
                .ok_or_else(|| Error::invalid(format!("no focus layer {layer} in trajectory")))?;
            if paths.is_empty() {
                paths = vec![Vec::new(); l.mu.len()];
            }
            for (j, p) in paths.iter_mut().enumerate() {
                p.push((l.mu[j], l.sigma[j]));
            }
        }
        Ok(paths)
    }
}

impl FociSnapshot {
    pub fn mean_mu(&self, layer: usize) -> Option<f64> {
        let l = self.layers.iter().find(|l| l.layer == layer)?;
        Some(l.mu.iter().sum::<f64>() / l.mu.len() as f64)
    }

    /// Mean `|mu - 0.5|` over the neurons of `layer`.
    pub fn center_deviation(&self, layer: usize) -> Option<f64> {
        let l = self.layers.iter().find(|l| l.layer == layer)?;
        Some(l.mu.iter().map(|m| (m - 0.5).abs()).sum::<f64>() / l.mu.len() as f64)
    }
}

/// Appends a snapshot of `network`'s foci to `trajectory`.
pub fn log_trajectory(trajectory: &mut FociTrajectory, network: &Network, epoch: usize) -> Result<()> {
    trajectory.log(network, epoch)
}
