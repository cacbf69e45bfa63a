//! Noise-padded blob experiment: watch four focusing neurons drift toward
//! the informative inputs.
//!
//! cargo run --release --example focus_seeking -- [left|sides] [seed] [out_dir]

use std::path::PathBuf;

use focusnet::analysis::svg;
use focusnet::data::NoisePlacement;
use focusnet::harness::synth_config;

fn main() -> focusnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let noise: NoisePlacement = args.next().as_deref().unwrap_or("left").parse()?;
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed must be an integer"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/focus_seeking".into()));
    std::fs::create_dir_all(&out)?;

    let cfg = synth_config(noise, seed);
    let (mut trainer, splits) = cfg.prepare()?;
    let initial = trainer.network.clone();
    trainer.fit(&splits)?;

    let traj = trainer.trajectory.as_ref().expect("focus network logs its trajectory");
    let (first, last) = (traj.first().unwrap(), traj.last().unwrap());
    println!("noise={noise:?} seed={seed}");
    println!(
        "mean mu      {:.4} -> {:.4}",
        first.mean_mu(0).unwrap(),
        last.mean_mu(0).unwrap()
    );
    println!(
        "|mu - 0.5|   {:.4} -> {:.4}",
        first.center_deviation(0).unwrap(),
        last.center_deviation(0).unwrap()
    );
    for (j, (m, s)) in last.layers[0].mu.iter().zip(&last.layers[0].sigma).enumerate() {
        println!("neuron {j}: mu {m:.3} sigma {s:.3}");
    }
    let acc = trainer.record.final_test().and_then(|m| m.accuracy).unwrap_or(f64::NAN);
    println!("held-out accuracy {acc:.4}");

    traj.write_csv(out.join("trajectory.csv"))?;
    traj.write_svg(0, out.join("trajectory.svg"))?;
    let (_, before) = initial.focus_layers().next().unwrap();
    let (_, after) = trainer.network.focus_layers().next().unwrap();
    std::fs::write(
        out.join("foci.svg"),
        svg::focus_curves(
            &[("initial", &before.focus), ("final", &after.focus)],
            "focus coefficients",
        )?,
    )?;
    std::fs::write(
        out.join("focused_weights.svg"),
        svg::focused_weights(&after.effective_weights()?, "effective weights")?,
    )?;
    println!("wrote {}", out.display());
    Ok(())
}
