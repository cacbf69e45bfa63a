use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use focusnet::analysis::{effective_weights_csv, sparsity_sweep, svg, write_sweep};
use focusnet::data::NoisePlacement;
use focusnet::gradcheck::{run_all, TOLERANCE, TRIALS};
use focusnet::harness::{
    compare, default_mnist_dir, load_checkpoint, mnist_available, mnist_desk_config, save_checkpoint, synth_config,
    ExperimentConfig, Metrics, Trainer, Variant,
};
use focusnet::{Error, Result};

#[derive(Parser)]
#[command(
    name = "focusnet",
    version,
    about = "Networks of focusing neurons: training, analysis and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every finite-difference suite and print the worst relative errors.
    Gradcheck {
        #[arg(long, default_value_t = TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Focus-seeking run on the noise-padded blob set.
    Synth {
        #[arg(long)]
        noise: NoisePlacement,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Rate for weights, biases and batchnorm (focus rates are fixed).
        #[arg(long)]
        weight_lr: Option<f64>,
        #[arg(long, default_value = "out/synth")]
        out: PathBuf,
    },
    /// Train from a TOML experiment file.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out/train")]
        out: PathBuf,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Repeated desk-scale MNIST runs per variant with t-tests against dense.
    Compare {
        #[arg(long, default_value_t = 3)]
        runs: usize,
        #[arg(long, value_delimiter = ',', default_value = "dense,focus-s,focus-c,fixed-s")]
        variants: Vec<Variant>,
        #[arg(long)]
        mnist_dir: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, default_value = "out/compare")]
        out: PathBuf,
    },
    /// Sparsity sweep: zero out-of-focus weights at each threshold.
    Prune {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        thresholds: Vec<f64>,
        /// Experiment file supplying the test data (default: config.toml next
        /// to the checkpoint).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out/prune")]
        out: PathBuf,
    },
    /// Effective weights `Φ ⊙ W` as CSV.
    Export {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Output file (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: kind={} message={}", e.kind(), e);
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Gradcheck { trials, seed } => {
            let report = run_all(trials, seed)?;
            print!("{report}");
            println!("worst {:.3e}, tolerance {TOLERANCE:e}", report.max_error());
            if !report.passed(TOLERANCE) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Synth {
            noise,
            seed,
            weight_lr,
            out,
        } => synth(noise, seed, weight_lr, &out)?,
        Command::Train { config, out, resume } => train(&config, &out, resume.as_deref())?,
        Command::Compare {
            runs,
            variants,
            mnist_dir,
            epochs,
            out,
        } => {
            let dir = mnist_dir.unwrap_or_else(default_mnist_dir);
            if !mnist_available(&dir) {
                return Err(Error::Config(format!(
                    "MNIST files not found in {} (run scripts/fetch_mnist.sh or pass --mnist-dir)",
                    dir.display()
                )));
            }
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
                |v, seed, acc| println!("{:<8} run {seed}: test accuracy {acc:.4}", v.name()),
            )?;
            for &v in &variants {
                println!("{:<8} mean {:.4}", v.name(), cmp.mean(v).unwrap_or(f64::NAN));
            }
            for (v, t) in cmp.tests()? {
                println!(
                    "dense vs {:<8} diff {:+.4}  t {:.3}  p {:.4}  df {:.2}",
                    v.name(),
                    t.diff,
                    t.t,
                    t.p,
                    t.df
                );
            }
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("runs.csv"), cmp.runs_csv())?;
            std::fs::write(out.join("ttests.csv"), cmp.tests_csv()?)?;
            println!("wrote {}", out.display());
        }
        Command::Prune {
            checkpoint,
            thresholds,
            config,
            out,
        } => {
            let ckpt = load_checkpoint(&checkpoint)?;
            let config = config.unwrap_or_else(|| checkpoint.with_file_name("config.toml"));
            let splits = ExperimentConfig::load(&config)?.data.load()?;
            let mut sorted = thresholds;
            sorted.sort_by(f64::total_cmp);
            let reports = sparsity_sweep(&ckpt.network, &sorted, &splits.test)?;
            for r in &reports {
                println!(
                    "t={:<6} sparsity {:.4}  accuracy {:.4} -> {:.4}",
                    r.threshold,
                    r.sparsity(),
                    r.accuracy_before.unwrap_or(f64::NAN),
                    r.accuracy_after.unwrap_or(f64::NAN)
                );
            }
            write_sweep(&reports, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Export { checkpoint, out } => {
            let csv = effective_weights_csv(&load_checkpoint(&checkpoint)?.network)?;
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn synth(noise: NoisePlacement, seed: u64, weight_lr: Option<f64>, out: &Path) -> Result<()> {
    let mut cfg = synth_config(noise, seed);
    if let Some(lr) = weight_lr {
        cfg.train.learning_rates.general = lr;
    }
    let (mut trainer, splits) = cfg.prepare()?;
    let initial = trainer.network.clone();
    trainer.fit(&splits)?;
    let traj = trainer.trajectory.as_ref().expect("focus network logs its trajectory");
    let (first, last) = (traj.first().expect("epoch 0"), traj.last().expect("final epoch"));
    println!(
        "mean mu     {:.4} -> {:.4}",
        first.mean_mu(0).unwrap_or(f64::NAN),
        last.mean_mu(0).unwrap_or(f64::NAN)
    );
    println!(
        "|mu - 0.5|  {:.4} -> {:.4}",
        first.center_deviation(0).unwrap_or(f64::NAN),
        last.center_deviation(0).unwrap_or(f64::NAN)
    );
    let acc = trainer.record.final_test().and_then(|m| m.accuracy).unwrap_or(f64::NAN);
    println!("held-out accuracy {acc:.4}");

    std::fs::create_dir_all(out)?;
    traj.write_csv(out.join("trajectory.csv"))?;
    traj.write_svg(0, out.join("trajectory.svg"))?;
    let (_, before) = initial.focus_layers().next().expect("focus layer");
    let (_, after) = trainer.network.focus_layers().next().expect("focus layer");
    std::fs::write(
        out.join("foci.svg"),
        svg::focus_curves(
            &[("initial", &before.focus), ("final", &after.focus)],
            "focus coefficients",
        )?,
    )?;
    std::fs::write(
        out.join("focused_weights_initial.svg"),
        svg::focused_weights(&before.effective_weights()?, "initial effective weights")?,
    )?;
    std::fs::write(
        out.join("focused_weights.svg"),
        svg::focused_weights(&after.effective_weights()?, "final effective weights")?,
    )?;
    trainer.record.write_csv(out.join("run.csv"))?;
    save_checkpoint(
        &trainer.checkpoint(splits.standardization.as_ref()),
        out.join("checkpoint.fnck"),
    )?;
    std::fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn train(config_path: &Path, out: &Path, resume: Option<&Path>) -> Result<()> {
    let cfg = ExperimentConfig::load(config_path)?;
    let (mut trainer, splits) = cfg.prepare()?;
    if let Some(path) = resume {
        let ckpt = load_checkpoint(path)?;
        if ckpt.network.spec != cfg.network {
            return Err(Error::Config(
                "checkpoint network differs from the config's network".into(),
            ));
        }
        trainer = Trainer::resume(ckpt)?;
        trainer.config.epochs = cfg.train.epochs;
    }
    while trainer.epoch < trainer.config.epochs {
        let val = (!splits.val.is_empty()).then_some(&splits.val);
        let test = (!splits.test.is_empty()).then_some(&splits.test);
        let rec = trainer.run_epoch(&splits.train, val, test)?;
        let acc = |m: &Option<Metrics>| {
            m.as_ref()
                .and_then(|m| m.accuracy)
                .map_or_else(|| "-".to_string(), |a| format!("{a:.4}"))
        };
        println!(
            "epoch {:>4}  loss {:.5}  val {}  test {}  ({:.2}s)",
            rec.epoch,
            rec.train_loss,
            acc(&rec.val),
            acc(&rec.test),
            rec.seconds
        );
    }
    std::fs::create_dir_all(out)?;
    save_checkpoint(
        &trainer.checkpoint(splits.standardization.as_ref()),
        out.join("checkpoint.fnck"),
    )?;
    std::fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    trainer.record.write_csv(out.join("run.csv"))?;
    if let Some(t) = &trainer.trajectory {
        t.write_csv(out.join("trajectory.csv"))?;
    }
    if let Some(best) = trainer.record.best() {
        println!("selected epoch {} ({:?})", best.epoch, trainer.record.selection());
    }
    println!("wrote {}", out.display());
    Ok(())
}
