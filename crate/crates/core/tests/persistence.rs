//! Checkpoints, resume and run-to-run determinism.

use focusnet::data::NoisePlacement;
use focusnet::harness::{
    from_bytes, load_checkpoint, save_checkpoint, synth_config, to_bytes, ExperimentConfig, LayerSpec, NetworkSpec,
    Trainer,
};
use focusnet::init::InitSpec;
use focusnet::optim::LrSchedule;
use focusnet::Error;

fn small_config(epochs: usize) -> ExperimentConfig {
    let mut cfg = synth_config(NoisePlacement::Left, 9);
    let init = InitSpec::default();
    cfg.network = NetworkSpec::mlp(40, &[(6, Some(&init), 0.25), (5, None, 0.1)], 2, false);
    cfg.train.epochs = epochs;
    cfg.train.batch_size = 50;
    cfg.train.decay = LrSchedule { factor: 0.5, period: 2 };
    cfg
}

#[test]
fn identical_runs_give_identical_bytes_and_records() {
    let cfg = small_config(3);
    let (a, sa) = cfg.run().unwrap();
    let (b, sb) = cfg.run().unwrap();
    assert_eq!(
        to_bytes(&a.checkpoint(sa.standardization.as_ref())).unwrap(),
        to_bytes(&b.checkpoint(sb.standardization.as_ref())).unwrap()
    );
    assert_eq!(a.record.without_timing(), b.record.without_timing());
    assert_eq!(a.trajectory.unwrap().to_csv(), b.trajectory.unwrap().to_csv());
}

#[test]
fn different_seeds_differ() {
    let cfg = small_config(1);
    let mut other = cfg.clone();
    other.train.seed += 1;
    let (a, _) = cfg.run().unwrap();
    let (b, _) = other.run().unwrap();
    assert_ne!(
        to_bytes(&a.checkpoint(None)).unwrap(),
        to_bytes(&b.checkpoint(None)).unwrap()
    );
}

#[test]
fn resume_from_disk_matches_uninterrupted_training() {
    let cfg = small_config(5);
    let (full, splits) = cfg.run().unwrap();
    let expected = to_bytes(&full.checkpoint(splits.standardization.as_ref())).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let (mut partial, splits) = cfg.prepare().unwrap();
    let test = Some(&splits.test);
    // stop at epoch 3, across a learning-rate decay boundary
    for _ in 0..3 {
        partial.run_epoch(&splits.train, None, test).unwrap();
    }
    let path = dir.path().join("ckpt");
    save_checkpoint(&partial.checkpoint(splits.standardization.as_ref()), &path).unwrap();
    drop(partial);

    let mut resumed = Trainer::resume(load_checkpoint(&path).unwrap()).unwrap();
    assert_eq!(resumed.epoch, 3);
    resumed.fit(&splits).unwrap();
    assert_eq!(resumed.epoch, 5);
    assert_eq!(
        to_bytes(&resumed.checkpoint(splits.standardization.as_ref())).unwrap(),
        expected
    );
    assert_eq!(
        resumed.record.epochs.last().unwrap().test,
        full.record.epochs.last().unwrap().test
    );
}

#[test]
fn loaded_network_predicts_bit_identically() {
    let cfg = small_config(2);
    let (trainer, splits) = cfg.run().unwrap();
    let bytes = to_bytes(&trainer.checkpoint(splits.standardization.as_ref())).unwrap();
    let back = from_bytes(&bytes).unwrap();
    let a = trainer.network.infer(&splits.test.features).unwrap();
    let b = back.network.infer(&splits.test.features).unwrap();
    let bits = |m: &focusnet::numerics::Matrix| m.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(back.standardization, splits.standardization);
    assert_eq!(back.config.as_ref(), Some(&cfg.train));
}

#[test]
fn frozen_focus_survives_training_bit_exactly() {
    let mut cfg = small_config(4);
    for l in &mut cfg.network.layers {
        if let LayerSpec::Focus { frozen, .. } = l {
            *frozen = true;
        }
    }
    let (mut trainer, splits) = cfg.prepare().unwrap();
    let before: Vec<_> = trainer.network.focus_layers().map(|(_, f)| f.focus.clone()).collect();
    let w0: Vec<_> = trainer.network.focus_layers().map(|(_, f)| f.weights.clone()).collect();
    trainer.fit(&splits).unwrap();
    let after: Vec<_> = trainer.network.focus_layers().map(|(_, f)| f.focus.clone()).collect();
    assert_eq!(before.len(), 1);
    for (b, a) in before.iter().zip(&after) {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&b.mu), bits(&a.mu));
        assert_eq!(bits(&b.sigma), bits(&a.sigma));
    }
    let moved = trainer
        .network
        .focus_layers()
        .zip(&w0)
        .any(|((_, f), w)| f.weights != *w);
    assert!(moved, "weights should still train");
}

#[test]
fn damaged_files_give_structured_errors() {
    let cfg = small_config(1);
    let (trainer, _) = cfg.run().unwrap();
    let bytes = to_bytes(&trainer.checkpoint(None)).unwrap();

    let mut flipped = bytes.clone();
    let k = bytes.len() - 20;
    flipped[k] ^= 0x40;
    assert!(matches!(from_bytes(&flipped), Err(Error::CheckpointChecksum { .. })));
    assert!(matches!(
        from_bytes(&bytes[..bytes.len() - 100]),
        Err(Error::CheckpointTruncated(_))
    ));
    let text = String::from_utf8_lossy(&bytes).replacen("checkpoint v1", "checkpoint v9", 1);
    assert!(matches!(
        from_bytes(text.as_bytes()),
        Err(Error::CheckpointVersion { .. })
    ));
}
