//! Seeded synthetic datasets standing in for real cellphone data.
//!
//! * Unimodal: four Gaussian blobs in `[0, 1]^D`, one per class.
//! * Multimodal: the class is `2 * high + right`, where `high` is read from
//!   tabular column 0 (near 0.25 or 0.75) and `right` is whether a bright
//!   blob sits in the right half of an otherwise dark image. The blob's
//!   vertical half is random, so each modality alone carries one bit and a
//!   tabular-only classifier is capped at 50%.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;
use crate::NUM_CLASSES;

pub const MIN_RECORDS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthMode {
    Unimodal,
    Multimodal,
}

impl SynthMode {
    pub fn name(self) -> &'static str {
        match self {
            SynthMode::Unimodal => "unimodal",
            SynthMode::Multimodal => "multimodal",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub records: usize,
    pub mode: SynthMode,
    pub tabular_width: usize,
    /// Images are `side × side × 3`.
    pub image_side: usize,
}

impl SynthConfig {
    pub fn new(seed: u64, records: usize, mode: SynthMode) -> Self {
        SynthConfig {
            seed,
            records,
            mode,
            tabular_width: 100,
            image_side: 32,
        }
    }
}

/// Generated records; `images` and `embeddings` exist in multimodal mode.
#[derive(Clone, Debug)]
pub struct SynthDataset {
    pub tabular: Tensor<f32>,
    pub images: Option<Tensor<f32>>,
    /// Block-averaged grayscale image, `(side/4)^2` wide, for Model 2.
    pub embeddings: Option<Tensor<f32>>,
    pub labels: Vec<usize>,
}

/// Class of a multimodal record from its two latent bits.
pub fn multimodal_class(tabular_high: bool, blob_right: bool) -> usize {
    2 * usize::from(tabular_high) + usize::from(blob_right)
}

/// Latent bits of a class: `(tabular_high, blob_right)`.
pub fn multimodal_bits(class: usize) -> (bool, bool) {
    (class >= 2, class % 2 == 1)
}

fn balanced_labels(n: usize, rng: &mut Rng) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).map(|i| i % NUM_CLASSES).collect();
    rng.shuffle(&mut labels);
    labels
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset> {
    if cfg.records < MIN_RECORDS {
        return Err(Error::InvalidConfig(alloc::format!(
            "synthetic datasets need at least {MIN_RECORDS} records, got {}",
            cfg.records
        )));
    }
    if cfg.tabular_width < 1 {
        return Err(Error::InvalidConfig("tabular width must be >= 1".into()));
    }
    let mut rng = Rng::seed_from_u64(cfg.seed);
    let labels = balanced_labels(cfg.records, &mut rng);
    match cfg.mode {
        SynthMode::Unimodal => Ok(unimodal(cfg, labels, &mut rng)),
        SynthMode::Multimodal => multimodal(cfg, labels, &mut rng),
    }
}

fn unimodal(cfg: &SynthConfig, labels: Vec<usize>, rng: &mut Rng) -> SynthDataset {
    let d = cfg.tabular_width;
    let centroids: Vec<f64> = (0..NUM_CLASSES * d)
        .map(|_| rng.uniform_range(0.2, 0.8))
        .collect();
    let mut data = Vec::with_capacity(cfg.records * d);
    for &y in &labels {
        for j in 0..d {
            let v = centroids[y * d + j] + 0.05 * rng.normal();
            data.push(v.clamp(0.0, 1.0) as f32);
        }
    }
    SynthDataset {
        tabular: Tensor::new([cfg.records, d], data).expect("sized"),
        images: None,
        embeddings: None,
        labels,
    }
}

fn multimodal(cfg: &SynthConfig, labels: Vec<usize>, rng: &mut Rng) -> Result<SynthDataset> {
    let (d, side) = (cfg.tabular_width, cfg.image_side);
    if side < 8 || !side.is_multiple_of(4) {
        return Err(Error::InvalidConfig(alloc::format!(
            "image side {side} must be a multiple of 4 and >= 8"
        )));
    }
    let n = cfg.records;
    let mut tab = Vec::with_capacity(n * d);
    let mut img = vec![0.0f32; n * side * side * 3];
    let sigma = side as f64 / 12.0;
    let jitter = (side / 10) as f64;
    for (r, &y) in labels.iter().enumerate() {
        let (high, right) = multimodal_bits(y);
        let noise = (0.05 * rng.normal()).clamp(-0.2, 0.2);
        tab.push((if high { 0.75 } else { 0.25 } + noise) as f32);
        for _ in 1..d {
            tab.push(rng.uniform() as f32);
        }

        let bottom = rng.below(2) == 1;
        let q = side as f64 / 4.0;
        let cx = if right { 3.0 * q } else { q } + rng.uniform_range(-jitter, jitter);
        let cy = if bottom { 3.0 * q } else { q } + rng.uniform_range(-jitter, jitter);
        let gain: [f64; 3] = core::array::from_fn(|_| rng.uniform_range(0.7, 1.0));
        let pixels = &mut img[r * side * side * 3..(r + 1) * side * side * 3];
        for i in 0..side {
            for j in 0..side {
                let dist2 = (i as f64 - cy) * (i as f64 - cy) + (j as f64 - cx) * (j as f64 - cx);
                let bump = libm::exp(-dist2 / (2.0 * sigma * sigma));
                for (ch, g) in gain.iter().enumerate() {
                    let bg = 0.05 + 0.02 * rng.normal();
                    pixels[(i * side + j) * 3 + ch] = (bg + g * bump).clamp(0.0, 1.0) as f32;
                }
            }
        }
    }
    let images = Tensor::new([n, side, side, 3], img)?;
    let embeddings = block_embedding(&images, 4)?;
    Ok(SynthDataset {
        tabular: Tensor::new([n, d], tab)?,
        images: Some(images),
        embeddings: Some(embeddings),
        labels,
    })
}

/// Grayscale `block × block` average pooling of an `[N, H, W, C]` stack,
/// flattened to `[N, (H/block)·(W/block)]`.
pub fn block_embedding(images: &Tensor<f32>, block: usize) -> Result<Tensor<f32>> {
    let s = images.shape();
    if s.len() != 4 || block == 0 || !s[1].is_multiple_of(block) || !s[2].is_multiple_of(block) {
        return Err(Error::InvalidShape {
            shape: s.to_vec(),
            reason: alloc::format!("cannot block-average by {block}"),
        });
    }
    let (n, h, w, c) = (s[0], s[1], s[2], s[3]);
    let (bh, bw) = (h / block, w / block);
    let mut out = Vec::with_capacity(n * bh * bw);
    let norm = (block * block * c) as f64;
    for r in 0..n {
        let px = images.row(r);
        for bi in 0..bh {
            for bj in 0..bw {
                let mut s = 0.0f64;
                for i in bi * block..(bi + 1) * block {
                    for j in bj * block..(bj + 1) * block {
                        for ch in 0..c {
                            s += px[(i * w + j) * c + ch] as f64;
                        }
                    }
                }
                out.push((s / norm) as f32);
            }
        }
    }
    Tensor::new([n, bh * bw], out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_records() {
        assert!(generate(&SynthConfig::new(0, 39, SynthMode::Unimodal)).is_err());
    }

    #[test]
    fn labels_balanced() {
        let ds = generate(&SynthConfig::new(3, 101, SynthMode::Unimodal)).unwrap();
        for c in 0..4 {
            let count = ds.labels.iter().filter(|&&l| l == c).count() as f64;
            assert!((count / 101.0 - 0.25).abs() <= 0.1 * 0.25 + 1e-9);
        }
    }

    #[test]
    fn class_bits_round_trip() {
        for c in 0..4 {
            let (h, r) = multimodal_bits(c);
            assert_eq!(multimodal_class(h, r), c);
        }
    }

    #[test]
    fn multimodal_shapes() {
        let ds = generate(&SynthConfig::new(1, 40, SynthMode::Multimodal)).unwrap();
        assert_eq!(ds.tabular.shape(), &[40, 100]);
        assert_eq!(ds.images.as_ref().unwrap().shape(), &[40, 32, 32, 3]);
        assert_eq!(ds.embeddings.as_ref().unwrap().shape(), &[40, 64]);
    }
}
