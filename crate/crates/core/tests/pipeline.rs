use gestarlite_core::classify::{DtwClassifier, TrainedClassifier};
use gestarlite_core::pipeline::*;
use gestarlite_core::synth::{generate_dataset, generate_trajectory, GestureLabel, SynthConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn without_false_positives_emissions_are_subsequences(
        seed in any::<u64>(),
        class in 0usize..10,
        detect_prob in 0.7..1.0f64,
        sigma in 0.0..8.0f64,
    ) {
        let t = generate_trajectory(GestureLabel::GESTURES[class], &SynthConfig::default(), seed).unwrap();
        let cfg = DetectorSimConfig { detect_prob, false_positive_prob: 0.0, tip_jitter_sigma: sigma, seed };
        let events = simulate_stream(&t, 5, 5, &cfg).unwrap();
        let tips: Vec<_> = events.iter().filter_map(|e| e.tip).collect();
        let mut state = TriggerState::new();
        let mut cursor = 0;
        for e in &events {
            if let Some(g) = state.step(e).unwrap() {
                for p in &g.points {
                    let pos = tips[cursor..].iter().position(|q| q == p);
                    prop_assert!(pos.is_some());
                    cursor += pos.unwrap() + 1;
                }
            }
        }
    }
}

#[test]
fn pipeline_is_deterministic() {
    let model = TrainedClassifier::Dtw(DtwClassifier::fit(&generate_dataset(3, &SynthConfig::default()).unwrap()).unwrap());
    let t = generate_trajectory(GestureLabel::Star, &SynthConfig::default(), 77).unwrap();
    let cfg = DetectorSimConfig {
        detect_prob: 0.9,
        false_positive_prob: 0.05,
        tip_jitter_sigma: 4.0,
        seed: 5,
    };
    let a = run_pipeline(&simulate_stream(&t, 10, 10, &cfg).unwrap(), &model, 0.85).unwrap();
    let b = run_pipeline(&simulate_stream(&t, 10, 10, &cfg).unwrap(), &model, 0.85).unwrap();
    let strip = |o: &[PipelineOutput]| o.iter().map(|x| (x.end_frame, x.trajectory.clone(), x.result.clone())).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn out_of_order_stream_is_an_error() {
    let model = TrainedClassifier::Dtw(DtwClassifier::fit(&generate_dataset(1, &SynthConfig::default()).unwrap()).unwrap());
    let events = vec![DetectionEvent::absent(3), DetectionEvent::absent(2)];
    assert!(run_pipeline(&events, &model, 0.85).is_err());
}
