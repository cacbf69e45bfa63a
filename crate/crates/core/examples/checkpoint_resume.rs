//! Interrupt a run, write a checkpoint, resume it and confirm the result is
//! bit-identical to training straight through.
//!
//! cargo run --release --example checkpoint_resume

use focusnet::data::NoisePlacement;
use focusnet::harness::{load_checkpoint, save_checkpoint, synth_config, to_bytes, Trainer};

fn main() -> focusnet::Result<()> {
    let mut cfg = synth_config(NoisePlacement::Left, 4);
    cfg.train.epochs = 40;

    let (straight, splits) = cfg.run()?;

    let (mut first, _) = cfg.prepare()?;
    while first.epoch < 25 {
        first.run_epoch(&splits.train, None, Some(&splits.test))?;
    }
    let dir = std::path::Path::new("target/checkpoint_resume");
    std::fs::create_dir_all(dir)?;
    let path = dir.join("epoch25.fnck");
    save_checkpoint(&first.checkpoint(splits.standardization.as_ref()), &path)?;
    println!("saved {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());

    let mut resumed = Trainer::resume(load_checkpoint(&path)?)?;
    resumed.fit(&splits)?;

    let a = to_bytes(&straight.checkpoint(splits.standardization.as_ref()))?;
    let b = to_bytes(&resumed.checkpoint(splits.standardization.as_ref()))?;
    println!("straight run and resumed run identical: {}", a == b);
    let acc = resumed.record.final_test().and_then(|m| m.accuracy).unwrap_or(f64::NAN);
    println!("epoch {} test accuracy {acc:.4}", resumed.epoch);
    Ok(())
}
