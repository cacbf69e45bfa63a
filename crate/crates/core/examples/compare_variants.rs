//! Repeated MNIST runs per variant and Welch t-tests against the dense baseline.
//!
//! cargo run --release --example compare_variants -- [runs] [epochs]

use focusnet::harness::{compare, default_mnist_dir, mnist_available, mnist_desk_config, Variant};

fn main() -> focusnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().map_or(3, |s| s.parse().expect("runs must be an integer"));
    let epochs: Option<usize> = args.next().map(|s| s.parse().expect("epochs must be an integer"));
    let dir = default_mnist_dir();
    if !mnist_available(&dir) {
        eprintln!("no MNIST files in {} (see scripts/fetch_mnist.sh)", dir.display());
        std::process::exit(2);
    }

    let variants = [Variant::Dense, Variant::FocusS, Variant::FocusC, Variant::FixedS];
    let cmp = compare(
        &variants,
        runs,
        |v, seed| {
            let mut cfg = mnist_desk_config(v, seed, &dir);
            if let Some(e) = epochs {
                cfg.train.epochs = e;
            }
            cfg
        },
        |v, seed, acc| println!("{:<8} seed {seed}: {acc:.4}", v.name()),
    )?;
    println!();
    for v in variants {
        println!("{:<8} mean {:.4}", v.name(), cmp.mean(v).unwrap_or(f64::NAN));
    }
    for (v, t) in cmp.tests()? {
        println!(
            "dense vs {:<8} diff {:+.4}  t {:+.3}  p {:.4}",
            v.name(),
            t.diff,
            t.t,
            t.p
        );
    }
    Ok(())
}
