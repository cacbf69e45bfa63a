//! One desk-scale MNIST run for a chosen variant, saved as a checkpoint.
//!
//! cargo run --release --example train_mnist -- [dense|focus-s|focus-c|fixed-s] [seed] [epochs]
//!
//! Reads the IDX files from `data/mnist` or `$FOCUSNET_MNIST_DIR`.

use std::path::PathBuf;

use focusnet::harness::{default_mnist_dir, mnist_available, mnist_desk_config, save_checkpoint, Variant};

fn main() -> focusnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let variant: Variant = args.next().as_deref().unwrap_or("focus-s").parse()?;
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed must be an integer"));
    let epochs: Option<usize> = args.next().map(|s| s.parse().expect("epochs must be an integer"));

    let dir = default_mnist_dir();
    if !mnist_available(&dir) {
        eprintln!("no MNIST files in {} (see scripts/fetch_mnist.sh)", dir.display());
        std::process::exit(2);
    }
    let mut cfg = mnist_desk_config(variant, seed, &dir);
    if let Some(e) = epochs {
        cfg.train.epochs = e;
    }
    let (mut trainer, splits) = cfg.prepare()?;
    println!(
        "{} seed {seed}: {} train / {} val / {} test images",
        variant.name(),
        splits.train.len(),
        splits.val.len(),
        splits.test.len()
    );
    while trainer.epoch < trainer.config.epochs {
        let rec = trainer.run_epoch(&splits.train, Some(&splits.val), Some(&splits.test))?;
        let acc = |m: &Option<focusnet::harness::Metrics>| m.as_ref().and_then(|m| m.accuracy).unwrap_or(f64::NAN);
        println!(
            "epoch {:>3}  loss {:.4}  val {:.4}  test {:.4}",
            rec.epoch,
            rec.train_loss,
            acc(&rec.val),
            acc(&rec.test)
        );
    }
    if let Some(best) = trainer.record.best() {
        let test = best.test.as_ref().and_then(|m| m.accuracy).unwrap_or(f64::NAN);
        println!("best validation epoch {}: test accuracy {test:.4}", best.epoch);
    }
    for (i, f) in trainer.network.focus_layers() {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "layer {i}: mean mu {:.3}, mean sigma {:.3}",
            mean(&f.focus.mu),
            mean(&f.focus.sigma)
        );
    }

    let out = PathBuf::from("target/train_mnist");
    std::fs::create_dir_all(&out)?;
    save_checkpoint(
        &trainer.checkpoint(None),
        out.join(format!("{}-{seed}.fnck", variant.name())),
    )?;
    std::fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    println!("wrote {}", out.display());
    Ok(())
}
