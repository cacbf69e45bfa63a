//! Monte-Carlo output variance of a freshly initialized focusing layer under
//! each weight scheme, for standardized and rectified inputs.
//!
//! cargo run --release --example init_variance -- [inputs] [neurons]

use focusnet::init::{init_focus_layer, InitSpec, MuScheme, WeightScheme};
use focusnet::layers::relu;
use focusnet::numerics::{sample_normal, Rng};
use focusnet::optim::ClipBounds;

fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

fn main() -> focusnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args
        .next()
        .map_or(64, |s| s.parse().expect("inputs must be an integer"));
    let n: usize = args
        .next()
        .map_or(200, |s| s.parse().expect("neurons must be an integer"));
    let mut rng = Rng::new(7);
    let z = sample_normal(&mut rng, 0.0, 1.0, 5000, m)?;
    let r = relu(&z);

    println!("{m} inputs, {n} neurons, 5000 samples");
    println!("{:<18} {:>12} {:>12}", "scheme", "N(0,1) in", "relu in");
    for scheme in [
        WeightScheme::DenseUniform,
        WeightScheme::FocusNorm,
        WeightScheme::FocusIdentical,
        WeightScheme::FocusPerWeight,
    ] {
        let spec = InitSpec {
            weights: scheme,
            mu: MuScheme::Random { lo: 0.0, hi: 1.0 },
            sigma0: 0.1,
            ..InitSpec::default()
        };
        let layer = init_focus_layer(m, n, &spec, &ClipBounds::default(), &mut rng)?;
        let vz = variance(layer.infer(&z)?.as_slice());
        let vr = variance(layer.infer(&r)?.as_slice());
        println!("{:<18} {vz:>12.3} {vr:>12.3}", format!("{scheme:?}"));
    }
    // the variance-matched schemes assume N(0,1) inputs unless told otherwise
    let spec = InitSpec {
        weights: WeightScheme::FocusIdentical,
        input_variance: 0.5 - 0.5 / std::f64::consts::PI,
        input_mean: 1.0 / (2.0 * std::f64::consts::PI).sqrt(),
        ..InitSpec::default()
    };
    let layer = init_focus_layer(m, n, &spec, &ClipBounds::default(), &mut rng)?;
    println!(
        "{:<18} {:>12} {:>12.3}",
        "identical, relu",
        "-",
        variance(layer.infer(&r)?.as_slice())
    );
    Ok(())
}
