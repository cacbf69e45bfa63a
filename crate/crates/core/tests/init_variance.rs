//! Monte-Carlo checks of the variance-preserving initializations.

use focusnet::focus::{focus_coefficients, FocusParams};
use focusnet::init::{
    init_focus_layer, init_focus_weights_identical, init_focus_weights_norm, init_focus_weights_per_weight, InitSpec,
    MuScheme, WeightScheme,
};
use focusnet::layers::relu;
use focusnet::numerics::{sample_normal, Rng};
use focusnet::optim::ClipBounds;

fn phi_column(m: usize, mu: f64, sigma: f64) -> Vec<f64> {
    focus_coefficients(&FocusParams::new(vec![mu], vec![sigma], m).unwrap())
        .unwrap()
        .phi
        .column(0)
}

fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

#[test]
fn per_weight_terms_have_equal_variance() {
    let m = 16;
    let phi = phi_column(m, 0.3, 0.15);
    let mut rng = Rng::new(1);
    let draws: Vec<Vec<f64>> = (0..10_000)
        .map(|_| init_focus_weights_per_weight(&phi, 1.0, 0.0, &mut rng).unwrap())
        .collect();
    let target = 1.0 / m as f64;
    let mut total = 0.0;
    for i in 0..m {
        let terms: Vec<f64> = draws.iter().map(|w| w[i] * phi[i]).collect();
        let v = variance(&terms);
        assert!((v / target - 1.0).abs() < 0.05, "input {i}: {v} vs {target}");
        total += v;
    }
    assert!((total - 1.0).abs() < 0.1, "{total}");
}

#[test]
fn identical_scheme_accounts_for_input_mean() {
    // inputs with mean 1 and variance 3: second moment 4
    let m = 20;
    let phi = phi_column(m, 0.5, 0.2);
    let mut rng = Rng::new(2);
    let mut ys = Vec::with_capacity(10_000);
    for _ in 0..10_000 {
        let w = init_focus_weights_identical(&phi, 3.0, 1.0, &mut rng).unwrap();
        let y: f64 = (0..m)
            .map(|i| w[i] * phi[i] * (1.0 + 3f64.sqrt() * rng.standard_normal()))
            .sum();
        ys.push(y);
    }
    let v = variance(&ys);
    assert!((v - 1.0).abs() < 0.1, "{v}");
}

#[test]
fn norm_scheme_doubles_variance_for_rectified_gain() {
    let m = 30;
    let phi = phi_column(m, 0.6, 0.1);
    let mut rng = Rng::new(3);
    let mut standardized = Vec::new();
    let mut rectified = Vec::new();
    for _ in 0..10_000 {
        let w = init_focus_weights_norm(&phi, &mut rng).unwrap();
        let z: Vec<f64> = (0..m).map(|_| rng.standard_normal()).collect();
        standardized.push((0..m).map(|i| w[i] * phi[i] * z[i]).sum::<f64>());
        rectified.push((0..m).map(|i| w[i] * phi[i] * z[i].max(0.0)).sum::<f64>());
    }
    let (vs, vr) = (variance(&standardized), variance(&rectified));
    assert!((vs - 2.0).abs() < 0.2, "{vs}");
    assert!((vr - 1.0).abs() < 0.1, "{vr}");
}

#[test]
fn layer_output_variance_is_preserved() {
    let (m, n) = (40, 500);
    let mut rng = Rng::new(4);
    let z = sample_normal(&mut rng, 0.0, 1.0, 10_000, m).unwrap();
    let r = relu(&z);
    for (scheme, x) in [
        (WeightScheme::FocusIdentical, &z),
        (WeightScheme::FocusPerWeight, &z),
        (WeightScheme::FocusNorm, &r),
        (WeightScheme::DenseUniform, &r),
    ] {
        let spec = InitSpec {
            weights: scheme,
            mu: MuScheme::Spread { lo: 0.1, hi: 0.9 },
            sigma0: 0.12,
            ..InitSpec::default()
        };
        let layer = init_focus_layer(m, n, &spec, &ClipBounds::default(), &mut rng).unwrap();
        let v = variance(layer.infer(x).unwrap().as_slice());
        assert!((v - 1.0).abs() < 0.1, "{scheme:?}: {v}");
    }
}
