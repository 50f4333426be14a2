use gestarlite_core::nn::gradcheck::STEP;
use gestarlite_core::nn::{gradient_check_entries, mse_loss, Network, Parameterized, Tensor};
use gestarlite_core::regressor::train::sample_target;
use gestarlite_core::regressor::*;
use gestarlite_core::rng::seeded;
use gestarlite_core::synth::render_fingertip_frame;
use rand::Rng;

#[test]
fn narrow_variant_gradients_match_finite_differences() {
    let model = build_regressor(&RegressorSpec::narrow(8, vec![16, 8]), 3).unwrap();
    let mut net: Network = model.network;
    let frame = render_fingertip_frame(5);
    let target = sample_target(&frame);
    let mut grads = net.zero_grads();
    let (out, trace) = net.forward_train(&frame.image).unwrap();
    let (_, g) = mse_loss(out.data(), target.data()).unwrap();
    net.backward(trace, &Tensor::vector(g), &mut grads).unwrap();

    // Bias and weight nudges move thousands of ReLU inputs and pool
    // windows at once; entries whose ±STEP perturbation crosses a kink are
    // not differentiable there and are left out.
    let base = net.activation_signature(&frame.image).unwrap();
    let mut rng = seeded(11);
    let mut entries = Vec::new();
    let mut skipped = 0;
    for p in 0..grads.len() {
        for _ in 0..12 {
            let i = rng.random_range(0..grads[p].len());
            let original = net.params()[p].data()[i];
            let mut smooth = true;
            for delta in [STEP, -STEP] {
                net.params_mut()[p].data_mut()[i] = original + delta;
                smooth &= net.activation_signature(&frame.image).unwrap() == base;
            }
            net.params_mut()[p].data_mut()[i] = original;
            if smooth {
                entries.push((p, i));
            } else {
                skipped += 1;
            }
        }
    }
    assert!(entries.len() >= 150, "only {} smooth entries ({skipped} skipped)", entries.len());
    let report = gradient_check_entries(
        &mut net,
        &grads,
        |n: &Network| Ok(mse_loss(n.forward(&frame.image)?.data(), target.data())?.0),
        &entries,
    )
    .unwrap();
    assert!(report.passes(1e-4), "{report:?}");
}

#[test]
fn short_training_does_not_diverge() {
    let data: Vec<_> = (0..200).map(render_fingertip_frame).collect();
    let cfg = RegressorTrainConfig {
        epochs: 3,
        batch_size: 16,
        ..Default::default()
    };
    let (model, history) = train_regressor(&RegressorSpec::narrow(4, vec![32, 16]), &data, &cfg).unwrap();
    assert_eq!(history.len(), 3);
    assert!(history[2].train_loss <= history[0].train_loss, "{history:?}");
    let test: Vec<_> = (10_000..10_050).map(render_fingertip_frame).collect();
    let curve = eval_success_curve(&model, &test).unwrap();
    assert!(curve.success_rate.windows(2).all(|w| w[0] <= w[1]));
    // Errors are bounded by the frame diagonal.
    assert!(curve.errors_px.iter().all(|&e| e <= 99.0 * 2f64.sqrt()));
    let recomputed: f64 = curve.errors_px.iter().sum::<f64>() / curve.errors_px.len() as f64;
    assert!((recomputed - curve.mean_error_px).abs() < 1e-12);
}

#[test]
fn checkpoint_file_round_trip() {
    let model = build_regressor(&RegressorSpec::narrow(4, vec![8, 8]), 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.ckpt");
    model.save(&path).unwrap();
    let back = FingertipRegressor::load(&path).unwrap();
    let frame = render_fingertip_frame(1);
    assert_eq!(back.predict(&frame.image).unwrap(), model.predict(&frame.image).unwrap());
}

#[test]
fn predictions_map_back_through_crop() {
    // A 2x upscaled frame cropped back to 99x99 keeps the tip geometry.
    let frame = render_fingertip_frame(2);
    let (big, _) = crop::resize_region(
        &frame.image,
        CropBox {
            x0: 0.0,
            y0: 0.0,
            width: 99.0,
            height: 99.0,
        },
        198,
        198,
    )
    .unwrap();
    let (crop, mapping) = crop_and_resize(
        &big,
        CropBox {
            x0: 0.0,
            y0: 0.0,
            width: 198.0,
            height: 198.0,
        },
    )
    .unwrap();
    assert_eq!(crop.shape(), &[3, 99, 99]);
    let (x, y) = mapping.to_source(frame.tip.0, frame.tip.1);
    assert!((x - (2.0 * frame.tip.0 + 0.5)).abs() < 1e-9);
    assert!((y - (2.0 * frame.tip.1 + 0.5)).abs() < 1e-9);
}
