//! Network assembly, training, evaluation, checkpoints, experiment configs
//! and presets.

mod checkpoint;
mod config;
mod network;
mod presets;
mod train;

pub use checkpoint::{from_bytes, load_checkpoint, save_checkpoint, to_bytes, Checkpoint, FORMAT_VERSION};
pub use config::{default_mnist_dir, mnist_available, DataConfig, ExperimentConfig, IdxFiles, MNIST_DIR_ENV};
pub use network::{loss_and_grad, LayerSpec, Network, NetworkSpec};
pub use presets::{
    compare, mnist_desk_config, synth_config, Comparison, Variant, DESK_EPOCHS, DESK_HIDDEN, DESK_TRAIN, DESK_VAL,
    SYNTH_CENTER_JITTER, SYNTH_EPOCHS, SYNTH_SIGMA0, SYNTH_WEIGHT_LR,
};
pub use train::{evaluate, train, EpochRecord, Metrics, RunRecord, Selection, Trainer};
