//! Post-training analysis: out-of-focus pruning, sparsity sweeps, foci
//! trajectories, figures and two-sample tests over repeated runs.
//!
//! CSV schemas (header row always present):
//!
//! - sparsity sweep: `threshold,sparsity,zeroed,total,accuracy_before,accuracy_after`
//! - per-neuron connections: `threshold,layer,neuron,nonzero,inputs`
//! - effective weights: `layer,input,neuron,weight`
//! - foci trajectory: `epoch,layer,neuron,mu,sigma`

mod prune;
pub mod svg;
mod trajectory;
mod ttest;

pub use prune::{
    connections_csv, effective_weights_csv, prune, sparsity_sweep, sweep_csv, write_sweep, LayerConnections,
    PruneReport,
};
pub use trajectory::{log_trajectory, FociSnapshot, FociTrajectory, LayerFoci};
pub use ttest::{ttest, two_sample_ttest, TTest, TTestKind};
