use pricefuse_core::models::{build_model_1, Architecture, ModelInput};
use pricefuse_core::nn::{train, TrainData, TrainingConfig};
use pricefuse_core::synth::{generate, SynthConfig, SynthMode};
use pricefuse_core::Rng;

#[test]
fn model1_unimodal_reaches_95_percent() {
    let ds = generate(&SynthConfig::new(11, 400, SynthMode::Unimodal)).unwrap();
    let cfg = TrainingConfig {
        epochs: 50,
        ..Default::default()
    };
    let model =
        build_model_1::<f32>(100, &Architecture::default(), &mut Rng::seed_from_u64(1)).unwrap();
    let t0 = std::time::Instant::now();
    let trained = train(
        model,
        TrainData {
            tabular: &ds.tabular,
            image: None,
            labels: &ds.labels,
        },
        &cfg,
    )
    .unwrap();
    let acc = trained
        .accuracy(
            ModelInput {
                tabular: &ds.tabular,
                image: None,
            },
            &ds.labels,
        )
        .unwrap();
    eprintln!(
        "acc {acc} in {:?}; trace {:?}",
        t0.elapsed(),
        &trained.accuracy_trace[..10]
    );
    assert!(acc >= 0.95);
}
