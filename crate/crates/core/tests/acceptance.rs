//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! show up in `cargo test` output.

use std::time::{Duration, Instant};

use focusnet::analysis::{prune, sparsity_sweep, sweep_csv, two_sample_ttest};
use focusnet::data::NoisePlacement;
use focusnet::focus::{focus_coefficients, FocusParams};
use focusnet::gradcheck::{check_focus_layers, TOLERANCE};
use focusnet::harness::{
    default_mnist_dir, evaluate, from_bytes, load_checkpoint, mnist_available, mnist_desk_config, save_checkpoint,
    synth_config, to_bytes, ExperimentConfig, LayerSpec, NetworkSpec, Trainer, Variant, SYNTH_WEIGHT_LR,
};
use focusnet::init::{init_focus_layer, InitSpec, MuScheme, WeightScheme};
use focusnet::layers::{relu, DenseLayer, FocusLayer};
use focusnet::numerics::{sample_normal, sample_uniform, Rng};
use focusnet::optim::ClipBounds;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err(e: focusnet::Error) -> String {
    format!("error: kind={} message={e}", e.kind())
}

fn gradients() -> Outcome {
    let report = check_focus_layers(25, &mut Rng::new(2024)).map_err(err)?;
    let worst = report.max_error();
    let names: Vec<String> = report.suites.iter().map(|s| s.name.clone()).collect();
    for p in ["weights", "bias", "mu", "sigma", "input"] {
        if !names.iter().any(|n| n == &format!("focus.{p}")) {
            return Err(format!("no {p} gradients were checked"));
        }
    }
    ensure(
        worst < TOLERANCE,
        format!("25 random layers, worst relative error {worst:.2e} (< {TOLERANCE:e})"),
    )
}

fn norm_invariant() -> Outcome {
    let mut rng = Rng::new(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = 10 + rng.below(191);
        let n = 1 + rng.below(8);
        let mu = (0..n).map(|_| rng.uniform(0.0, 1.0)).collect();
        let sigma = (0..n).map(|_| rng.uniform(0.01, 0.5)).collect();
        let c = focus_coefficients(&FocusParams::new(mu, sigma, m).map_err(err)?).map_err(err)?;
        for j in 0..n {
            let sq: f64 = c.phi.column(j).iter().map(|p| p * p).sum();
            worst = worst.max((sq - m as f64).abs());
        }
    }
    ensure(
        worst <= 1e-9,
        format!("100 settings, worst |sum phi^2 - m| = {worst:.2e}"),
    )
}

fn dense_limit() -> Outcome {
    let mut rng = Rng::new(3);
    let (m, n, batch) = (12, 5, 7);
    let w = sample_uniform(&mut rng, -1.0, 1.0, m, n).map_err(err)?;
    let b: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let mu = (0..n).map(|_| rng.uniform(0.0, 1.0)).collect();
    let params = FocusParams::new(mu, vec![1e4; n], m).map_err(err)?;
    let mut focus = FocusLayer::new(w.clone(), b.clone(), params).map_err(err)?;
    let mut dense = DenseLayer::new(w, b).map_err(err)?;
    let x = sample_normal(&mut rng, 0.0, 1.0, batch, m).map_err(err)?;
    let dout = sample_normal(&mut rng, 0.0, 1.0, batch, n).map_err(err)?;
    let out_gap = focus
        .forward(&x)
        .map_err(err)?
        .sub(&dense.forward(&x).map_err(err)?)
        .map_err(err)?
        .max_abs();
    let dx_gap = focus
        .backward(&dout)
        .map_err(err)?
        .sub(&dense.backward(&dout).map_err(err)?)
        .map_err(err)?
        .max_abs();
    ensure(
        out_gap <= 1e-6 && dx_gap <= 1e-6,
        format!("sigma = 1e4: max output gap {out_gap:.2e}, max input-gradient gap {dx_gap:.2e}"),
    )
}

struct SynthRun {
    mu0: f64,
    mu: f64,
    dev0: f64,
    dev: f64,
    accuracy: f64,
}

fn synth_runs(noise: NoisePlacement, weight_lr: f64) -> Result<Vec<SynthRun>, String> {
    (1..=5)
        .map(|seed| {
            let mut cfg = synth_config(noise, seed);
            cfg.train.learning_rates.general = weight_lr;
            let (trainer, _) = cfg.run().map_err(err)?;
            let t = trainer.trajectory.as_ref().ok_or("no trajectory")?;
            let (a, z) = (t.first().ok_or("empty")?, t.last().ok_or("empty")?);
            Ok(SynthRun {
                mu0: a.mean_mu(0).ok_or("no focus layer")?,
                mu: z.mean_mu(0).ok_or("no focus layer")?,
                dev0: a.center_deviation(0).ok_or("no focus layer")?,
                dev: z.center_deviation(0).ok_or("no focus layer")?,
                accuracy: trainer
                    .record
                    .final_test()
                    .and_then(|m| m.accuracy)
                    .ok_or("no test split")?,
            })
        })
        .collect()
}

fn focus_left() -> Outcome {
    let runs = synth_runs(NoisePlacement::Left, SYNTH_WEIGHT_LR)?;
    let moved = runs.iter().filter(|r| r.mu > 0.55).count();
    let min_acc = runs.iter().map(|r| r.accuracy).fold(1.0, f64::min);
    let mus: Vec<String> = runs.iter().map(|r| format!("{:.2}->{:.2}", r.mu0, r.mu)).collect();
    let equal_rates = synth_runs(NoisePlacement::Left, 1e-3)?;
    println!(
        "    note: with weight rate 1e-3 instead of {SYNTH_WEIGHT_LR:e}, {}/5 runs end with mean mu > 0.55",
        equal_rates.iter().filter(|r| r.mu > 0.55).count()
    );
    ensure(
        moved >= 4 && min_acc >= 0.9,
        format!(
            "mean mu [{}], {moved}/5 above 0.55, min accuracy {min_acc:.3}",
            mus.join(" ")
        ),
    )
}

fn focus_sides() -> Outcome {
    let runs = synth_runs(NoisePlacement::Sides, SYNTH_WEIGHT_LR)?;
    let closer = runs.iter().filter(|r| r.dev < r.dev0).count();
    let devs: Vec<String> = runs.iter().map(|r| format!("{:.3}->{:.3}", r.dev0, r.dev)).collect();
    let equal_rates = synth_runs(NoisePlacement::Sides, 1e-3)?;
    println!(
        "    note: with weight rate 1e-3 instead of {SYNTH_WEIGHT_LR:e}, {}/5 runs end closer to the center",
        equal_rates.iter().filter(|r| r.dev < r.dev0).count()
    );
    ensure(
        closer >= 4,
        format!("mean |mu - 0.5| [{}], {closer}/5 closer to the center", devs.join(" ")),
    )
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Trains dense and Focus-s three times each; criterion 7 reuses the first
/// Focus-s network.
fn mnist_runs() -> Result<(Vec<f64>, Vec<f64>, Trainer, focusnet::data::Splits), String> {
    let dir = default_mnist_dir();
    if !mnist_available(&dir) {
        return Err(format!(
            "MNIST files not found in {} (run scripts/fetch_mnist.sh)",
            dir.display()
        ));
    }
    let mut dense = Vec::new();
    let mut focus = Vec::new();
    let mut kept = None;
    for seed in 1..=3 {
        for variant in [Variant::Dense, Variant::FocusS] {
            let (trainer, splits) = mnist_desk_config(variant, seed, &dir).run().map_err(err)?;
            let acc = trainer
                .record
                .test_at_best()
                .and_then(|m| m.accuracy)
                .ok_or("no test accuracy")?;
            match variant {
                Variant::Dense => dense.push(acc),
                _ => focus.push(acc),
            }
            if variant == Variant::FocusS && kept.is_none() {
                kept = Some((trainer, splits));
            }
        }
    }
    let (t, s) = kept.expect("seed 1 ran");
    Ok((dense, focus, t, s))
}

static MNIST: std::sync::Mutex<Option<(Trainer, focusnet::data::Splits)>> = std::sync::Mutex::new(None);

fn mnist_comparison() -> Outcome {
    let (dense, focus, trainer, splits) = mnist_runs()?;
    *MNIST.lock().unwrap() = Some((trainer, splits));
    let (md, mf) = (mean(&dense), mean(&focus));
    let min_focus = focus.iter().copied().fold(1.0, f64::min);
    let fmt = |v: &[f64]| v.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>().join(" ");
    let t = two_sample_ttest(&dense, &focus).map_err(err)?;
    ensure(
        min_focus >= 0.95 && mf >= md - 0.003,
        format!(
            "dense [{}] mean {md:.4}; focus-s [{}] mean {mf:.4}; welch p {:.3}",
            fmt(&dense),
            fmt(&focus),
            t.p
        ),
    )
}

fn pruning() -> Outcome {
    let guard = MNIST.lock().unwrap();
    let (trainer, splits) = guard
        .as_ref()
        .ok_or("needs the criterion 6 network, which did not train")?;
    let net = &trainer.network;
    let base = evaluate(net, &splits.test).map_err(err)?.accuracy.ok_or("no labels")?;
    let at = evaluate(&prune(net, 0.3).map_err(err)?, &splits.test)
        .map_err(err)?
        .accuracy
        .ok_or("no labels")?;
    let thresholds = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0];
    let reports = sparsity_sweep(net, &thresholds, &splits.test).map_err(err)?;
    let csv = sweep_csv(&reports);
    let sparsity: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .nth(1)
                .and_then(|s| s.parse().ok())
                .ok_or(format!("bad row `{l}`"))
        })
        .collect::<Result<_, _>>()?;
    let monotone = sparsity.windows(2).all(|w| w[0] <= w[1]);
    let half = reports
        .iter()
        .find(|r| r.sparsity() >= 0.5)
        .ok_or("no threshold reached 50% sparsity")?;
    let half_acc = half.accuracy_after.ok_or("no labels")?;
    let at_sparsity = reports
        .iter()
        .find(|r| r.threshold == 0.3)
        .map_or(f64::NAN, |r| r.sparsity());
    ensure(
        (at - base).abs() <= 0.005 && monotone && (half_acc - base).abs() <= 0.01,
        format!(
            "unpruned {base:.4}; t=0.3 ({:.1}% sparse) {at:.4}; first >=50% point t={} ({:.1}% sparse) {half_acc:.4}; sweep monotone: {monotone}",
            100.0 * at_sparsity,
            half.threshold,
            100.0 * half.sparsity()
        ),
    )
}

fn init_variance() -> Outcome {
    let (m, n, samples) = (64, 1000, 10_000);
    let mut rng = Rng::new(8);
    let z = sample_normal(&mut rng, 0.0, 1.0, samples, m).map_err(err)?;
    let rectified = relu(&z);
    let mut lines = Vec::new();
    let mut ok = true;
    for (scheme, x, label) in [
        (
            WeightScheme::FocusNorm,
            &rectified,
            "focus-norm (ReLU of standardized inputs)",
        ),
        (WeightScheme::FocusIdentical, &z, "focus-identical"),
        (WeightScheme::FocusPerWeight, &z, "focus-per-weight"),
    ] {
        let spec = InitSpec {
            weights: scheme,
            mu: MuScheme::Random { lo: 0.0, hi: 1.0 },
            sigma0: 0.1,
            ..InitSpec::default()
        };
        let layer = init_focus_layer(m, n, &spec, &ClipBounds::default(), &mut rng).map_err(err)?;
        // joint variance over weight draws (1000 neurons) and inputs
        let net = layer.infer(x).map_err(err)?;
        let v = net.as_slice();
        let mu = mean(v);
        let var = v.iter().map(|y| (y - mu) * (y - mu)).sum::<f64>() / v.len() as f64;
        ok &= (var - 1.0).abs() <= 0.1;
        lines.push(format!("{label} {var:.3}"));
    }
    ensure(ok, format!("output variance: {}", lines.join(", ")))
}

fn frozen_focus() -> Outcome {
    let mut cfg = synth_config(NoisePlacement::Sides, 4);
    cfg.train.epochs = 20;
    if let LayerSpec::Focus { frozen, .. } = &mut cfg.network.layers[0] {
        *frozen = true;
    }
    let (mut trainer, splits) = cfg.prepare().map_err(err)?;
    let (_, before) = trainer.network.focus_layers().next().ok_or("no focus layer")?;
    let before = before.clone();
    trainer.fit(&splits).map_err(err)?;
    let (_, after) = trainer.network.focus_layers().next().ok_or("no focus layer")?;
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let same = bits(&before.focus.mu) == bits(&after.focus.mu) && bits(&before.focus.sigma) == bits(&after.focus.sigma);
    let moved = before.weights.sub(&after.weights).map_err(err)?.max_abs();
    ensure(
        same && moved > 0.0,
        format!("20 epochs: mu/sigma bit-identical {same}, weights moved by up to {moved:.3}"),
    )
}

fn determinism_config() -> ExperimentConfig {
    let mut cfg = synth_config(NoisePlacement::Sides, 5);
    let init = InitSpec {
        sigma0: 0.1,
        ..InitSpec::default()
    };
    cfg.network = NetworkSpec::mlp(40, &[(8, Some(&init), 0.3)], 2, false);
    cfg.train.epochs = 2;
    cfg
}

fn determinism() -> Outcome {
    let cfg = determinism_config();
    let full = |c: &ExperimentConfig| -> Result<Vec<u8>, String> {
        let (t, s) = c.run().map_err(err)?;
        to_bytes(&t.checkpoint(s.standardization.as_ref())).map_err(err)
    };
    let a = full(&cfg)?;
    let b = full(&cfg)?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("epoch1.fnck");
    let (mut first, splits) = cfg.prepare().map_err(err)?;
    let val = (!splits.val.is_empty()).then_some(&splits.val);
    let test = Some(&splits.test);
    first.run_epoch(&splits.train, val, test).map_err(err)?;
    save_checkpoint(&first.checkpoint(splits.standardization.as_ref()), &path).map_err(err)?;
    let mut resumed = Trainer::resume(load_checkpoint(&path).map_err(err)?).map_err(err)?;
    resumed.run_epoch(&splits.train, val, test).map_err(err)?;
    let r = to_bytes(&resumed.checkpoint(splits.standardization.as_ref())).map_err(err)?;
    let back = to_bytes(&from_bytes(&r).map_err(err)?).map_err(err)?;
    ensure(
        a == b && a == r && back == r,
        format!(
            "repeat run identical: {}; resumed == uninterrupted: {}; {} checkpoint bytes",
            a == b,
            a == r,
            a.len()
        ),
    )
}

fn ttest_fixture() -> Outcome {
    let a = [
        27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4,
    ];
    let b = [
        27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4,
    ];
    let ab = two_sample_ttest(&a, &b).map_err(err)?;
    let ba = two_sample_ttest(&b, &a).map_err(err)?;
    let round3 = |x: f64| (x * 1000.0).round() / 1000.0;
    let matches = round3(ab.t) == -2.455 && round3(ab.p) == 0.021;
    let symmetric = ab.t == -ba.t && ab.p == ba.p && ab.df == ba.df;
    ensure(
        matches && symmetric,
        format!(
            "t = {:.4} (expected -2.455), p = {:.4} (expected 0.021), df = {:.2}; symmetric {symmetric}",
            ab.t, ab.p, ab.df
        ),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            id: 1,
            name: "gradient correctness",
            budget: secs(10),
            run: gradients,
        },
        Criterion {
            id: 2,
            name: "norm invariant",
            budget: secs(1),
            run: norm_invariant,
        },
        Criterion {
            id: 3,
            name: "dense-limit equivalence",
            budget: secs(1),
            run: dense_limit,
        },
        Criterion {
            id: 4,
            name: "focus seeking, left noise",
            budget: secs(120),
            run: focus_left,
        },
        Criterion {
            id: 5,
            name: "focus seeking, sides noise",
            budget: secs(120),
            run: focus_sides,
        },
        Criterion {
            id: 6,
            name: "desk-scale MNIST comparison",
            budget: secs(900),
            run: mnist_comparison,
        },
        Criterion {
            id: 7,
            name: "pruning robustness",
            budget: secs(300),
            run: pruning,
        },
        Criterion {
            id: 8,
            name: "initialization variance",
            budget: secs(60),
            run: init_variance,
        },
        Criterion {
            id: 9,
            name: "frozen focus",
            budget: secs(60),
            run: frozen_focus,
        },
        Criterion {
            id: 10,
            name: "determinism and persistence",
            budget: secs(60),
            run: determinism,
        },
        Criterion {
            id: 11,
            name: "t-test fixture",
            budget: secs(1),
            run: ttest_fixture,
        },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if took <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {:?} budget", c.budget)),
            Err(d) => (false, d),
        };
        println!(
            "criterion {:>2} {:<30} {}  {}  [{:.2}s]",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            detail,
            took.as_secs_f64()
        );
        if !pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("all {} criteria passed", criteria.len());
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
