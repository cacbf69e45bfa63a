//! Train a focusing network on any numeric CSV described by a TOML file.
//!
//! cargo run --release --example csv_experiment -- [experiment.toml]
//!
//! Without arguments a demo table is written to `target/csv_experiment` in
//! which only two of twelve columns carry the label.

use std::fmt::Write as _;

use focusnet::harness::ExperimentConfig;
use focusnet::numerics::Rng;

const DEMO: &str = r#"
[data]
source = "csv"
path = "target/csv_experiment/table.csv"
target = "label"

[network]
inputs = 12

[[network.layers]]
kind = "focus"
units = 6
init = { sigma0 = 0.15, mu = { kind = "spread", lo = 0.1, hi = 0.9 } }

[[network.layers]]
kind = "batch-norm"

[[network.layers]]
kind = "relu"

[[network.layers]]
kind = "dense"
units = 2

[train]
epochs = 60
batch_size = 32
seed = 1
momentum = 0.9
log_trajectory = true
learning_rates = { general = 0.01, mu = 0.01, sigma = 0.001 }
"#;

fn write_demo_table() -> focusnet::Result<()> {
    let mut rng = Rng::new(3);
    let header: Vec<String> = (0..12).map(|i| format!("x{i}")).collect();
    let mut text = format!("{},label\n", header.join(","));
    for _ in 0..1500 {
        let x: Vec<f64> = (0..12).map(|_| rng.standard_normal()).collect();
        let label = usize::from(x[8] * x[9] > 0.0);
        let row: Vec<String> = x.iter().map(|v| format!("{v:.5}")).collect();
        let _ = writeln!(text, "{},{label}", row.join(","));
    }
    std::fs::create_dir_all("target/csv_experiment")?;
    std::fs::write("target/csv_experiment/table.csv", text)?;
    Ok(())
}

fn main() -> focusnet::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            write_demo_table()?;
            ExperimentConfig::from_toml(DEMO)?
        }
    };
    let (trainer, splits) = cfg.run()?;
    println!(
        "{} train / {} val / {} test rows",
        splits.train.len(),
        splits.val.len(),
        splits.test.len()
    );
    if let Some(m) = trainer.record.final_test() {
        match m.accuracy {
            Some(a) => println!("test accuracy {a:.4}"),
            None => println!("test mse {:.4}", m.loss),
        }
    }
    for (i, f) in trainer.network.focus_layers() {
        for (j, (mu, s)) in f.focus.mu.iter().zip(&f.focus.sigma).enumerate() {
            println!(
                "layer {i} neuron {j}: mu {mu:.3} (input {:.1}) sigma {s:.3}",
                mu * (f.focus.inputs - 1) as f64
            );
        }
    }
    Ok(())
}
