//! Finite-difference check of every backward pass.
//!
//! cargo run --example gradcheck -- [trials] [seed]

use focusnet::gradcheck::{run_all, TOLERANCE, TRIALS};

fn main() -> focusnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args
        .next()
        .map_or(TRIALS, |s| s.parse().expect("trials must be an integer"));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));
    let start = std::time::Instant::now();
    let report = run_all(trials, seed)?;
    print!("{report}");
    println!(
        "worst {:.3e} (tolerance {TOLERANCE:e}) in {:.2}s",
        report.max_error(),
        start.elapsed().as_secs_f64()
    );
    if !report.passed(TOLERANCE) {
        std::process::exit(1);
    }
    Ok(())
}
