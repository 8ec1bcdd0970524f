use pricefuse_core::split::stratified_split;
use pricefuse_core::synth::{generate, multimodal_bits, multimodal_class, SynthConfig, SynthMode};
use pricefuse_core::Rng;
use proptest::prelude::*;

#[test]
fn classes_balanced_within_ten_percent() {
    for mode in [SynthMode::Unimodal, SynthMode::Multimodal] {
        for n in [40usize, 203, 1000] {
            let ds = generate(&SynthConfig::new(5, n, mode)).unwrap();
            assert_eq!(ds.labels.len(), n);
            let mut counts = [0usize; 4];
            ds.labels.iter().for_each(|&l| counts[l] += 1);
            for c in counts {
                assert!(
                    (c as f64 - n as f64 / 4.0).abs() <= 0.1 * n as f64 / 4.0,
                    "{mode:?} n {n}: {counts:?}"
                );
            }
        }
    }
    assert!(generate(&SynthConfig::new(0, 39, SynthMode::Unimodal)).is_err());
}

fn brightest_column(px: &[f32], side: usize) -> usize {
    let mut best = (f32::MIN, 0);
    for i in 0..side {
        for j in 0..side {
            let g: f32 = px[(i * side + j) * 3..(i * side + j) * 3 + 3].iter().sum();
            if g > best.0 {
                best = (g, j);
            }
        }
    }
    best.1
}

#[test]
fn multimodal_classes_need_both_modalities() {
    let cfg = SynthConfig::new(17, 2000, SynthMode::Multimodal);
    let ds = generate(&cfg).unwrap();
    let images = ds.images.as_ref().unwrap();
    let side = cfg.image_side;
    assert_eq!(images.shape(), &[2000, side, side, 3]);
    assert_eq!(
        ds.embeddings.as_ref().unwrap().shape(),
        &[2000, (side / 4) * (side / 4)]
    );

    let tab_bit: Vec<bool> = (0..2000).map(|i| ds.tabular.row(i)[0] > 0.5).collect();
    let img_bit: Vec<bool> = (0..2000)
        .map(|i| brightest_column(images.row(i), side) >= side / 2)
        .collect();
    for i in 0..2000 {
        assert_eq!(
            multimodal_class(tab_bit[i], img_bit[i]),
            ds.labels[i],
            "record {i}"
        );
        assert_eq!(multimodal_bits(ds.labels[i]), (tab_bit[i], img_bit[i]));
    }

    // Any map from the tabular bit to a class, evaluated over every choice.
    let mut best = 0.0f64;
    for lo in 0..4 {
        for hi in 0..4 {
            let acc = (0..2000)
                .filter(|&i| (if tab_bit[i] { hi } else { lo }) == ds.labels[i])
                .count() as f64
                / 2000.0;
            best = best.max(acc);
        }
    }
    assert!(best <= 0.75, "tabular-only accuracy {best}");
    assert!(ds.tabular.data().iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(images.data().iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn same_seed_is_byte_identical() {
    for mode in [SynthMode::Unimodal, SynthMode::Multimodal] {
        let a = generate(&SynthConfig::new(3, 120, mode)).unwrap();
        let b = generate(&SynthConfig::new(3, 120, mode)).unwrap();
        let c = generate(&SynthConfig::new(4, 120, mode)).unwrap();
        let bits = |t: &pricefuse_core::Tensor<f32>| {
            t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        };
        assert_eq!(bits(&a.tabular), bits(&b.tabular));
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.images.as_ref().map(bits), b.images.as_ref().map(bits));
        assert_ne!(bits(&a.tabular), bits(&c.tabular));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn stratified_split_preserves_proportions(seed in any::<u64>(), n in 40usize..600) {
        let mut rng = Rng::seed_from_u64(seed);
        let labels: Vec<usize> = (0..n).map(|_| rng.below(4)).collect();
        let (train, test) = stratified_split(&labels, 0.8, &mut rng).unwrap();
        prop_assert_eq!(train.len() + test.len(), n);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for c in 0..4 {
            let whole = labels.iter().filter(|&&l| l == c).count();
            let tr = train.iter().filter(|&&i| labels[i] == c).count();
            prop_assert!((tr as f64 - 0.8 * whole as f64).abs() <= 0.5 + 1e-9);
            let p_all = whole as f64 / n as f64;
            let p_train = tr as f64 / train.len() as f64;
            prop_assert!((p_all - p_train).abs() <= 0.02 || n < 100, "class {} {} vs {}", c, p_all, p_train);
        }
    }
}
