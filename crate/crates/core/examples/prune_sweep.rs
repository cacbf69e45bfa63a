//! Zero the out-of-focus weights of a trained network at increasing
//! thresholds and watch accuracy against sparsity.
//!
//! cargo run --release --example prune_sweep -- [checkpoint config.toml]
//!
//! Without arguments a noise-padded blob network is trained first.

use focusnet::analysis::{sparsity_sweep, write_sweep};
use focusnet::data::NoisePlacement;
use focusnet::harness::{load_checkpoint, synth_config, ExperimentConfig, SYNTH_WEIGHT_LR};

fn main() -> focusnet::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (network, test) = match args.as_slice() {
        [ckpt, cfg] => {
            let network = load_checkpoint(ckpt)?.network;
            (network, ExperimentConfig::load(cfg)?.data.load()?.test)
        }
        [] => {
            let mut cfg = synth_config(NoisePlacement::Sides, 1);
            cfg.train.learning_rates.general = SYNTH_WEIGHT_LR;
            let (trainer, splits) = cfg.run()?;
            (trainer.network, splits.test)
        }
        _ => {
            eprintln!("usage: prune_sweep [checkpoint config.toml]");
            std::process::exit(2);
        }
    };

    let thresholds = [0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9];
    let reports = sparsity_sweep(&network, &thresholds, &test)?;
    println!("threshold  sparsity  accuracy");
    if let Some(r) = reports.first() {
        println!(
            "{:>9}  {:>8.4}  {:.4}",
            "none",
            0.0,
            r.accuracy_before.unwrap_or(f64::NAN)
        );
    }
    for r in &reports {
        println!(
            "{:>9}  {:>8.4}  {:.4}",
            r.threshold,
            r.sparsity(),
            r.accuracy_after.unwrap_or(f64::NAN)
        );
    }
    write_sweep(&reports, "target/prune_sweep")?;
    println!("wrote target/prune_sweep");
    Ok(())
}
