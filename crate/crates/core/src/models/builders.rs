use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::graph::ModelGraph;
use crate::error::{Error, Result};
use crate::nn::Layer;
use crate::rng::Rng;
use crate::scalar::Real;
use crate::NUM_CLASSES;

/// Which of the five architectures a graph implements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelId {
    /// Dense tabular network only.
    Unimodal = 1,
    /// Dense tabular branch + precomputed image embeddings.
    ExternalEmbedding = 2,
    /// Dense tabular branch + conv image branch with a dense layer.
    ConvImage = 3,
    /// Conv branches on both the tabular matrix and the image.
    FullyConvolutional = 4,
    /// Model 4 with a dense layer after each conv branch.
    ConvDense = 5,
}

impl ModelId {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Result<Self> {
        Ok(match n {
            1 => ModelId::Unimodal,
            2 => ModelId::ExternalEmbedding,
            3 => ModelId::ConvImage,
            4 => ModelId::FullyConvolutional,
            5 => ModelId::ConvDense,
            _ => return Err(Error::InvalidConfig(format!("model id {n} not in 1..=5"))),
        })
    }
}

/// Layer widths and conv hyperparameters shared by the builders.
#[derive(Clone, Debug, PartialEq)]
pub struct Architecture {
    /// Hidden widths of the dense tabular stack.
    pub tabular_hidden: [usize; 2],
    /// Hidden width of the post-fusion head.
    pub head_hidden: usize,
    pub kernel: usize,
    pub image_filters: Vec<usize>,
    pub tabular_filters: Vec<usize>,
    pub pool_window: usize,
    pub pool_stride: usize,
    /// Width of the dense layer closing a conv branch (Models 3 and 5).
    pub branch_dense: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            tabular_hidden: [300, 120],
            head_hidden: 120,
            kernel: 3,
            image_filters: vec![16, 32, 64],
            tabular_filters: vec![8, 16],
            pool_window: 2,
            pool_stride: 2,
            branch_dense: 128,
        }
    }
}

/// Second input of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImageInput {
    None,
    /// Precomputed embedding rows of this width.
    Embedding {
        width: usize,
    },
    /// Raw image tensors.
    Image {
        height: usize,
        width: usize,
        channels: usize,
    },
}

/// Where image features come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddingProvider {
    /// Learned by the model's own conv branch.
    InternalCnn,
    /// A PFT1 matrix with one row per dataset record.
    ExternalFile { path: String, width: usize },
}

/// Everything needed to rebuild a graph's structure.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub id: ModelId,
    pub tabular_width: usize,
    pub image: ImageInput,
    pub arch: Architecture,
}

fn dense_stack<T: Real>(input: usize, widths: &[usize], rng: &mut Rng) -> Vec<Layer<T>> {
    let mut layers = Vec::new();
    let mut prev = input;
    for &w in widths {
        layers.push(Layer::dense(prev, w, rng));
        layers.push(Layer::relu());
        prev = w;
    }
    layers
}

fn classifier_head<T: Real>(input: usize, hidden: usize, rng: &mut Rng) -> Vec<Layer<T>> {
    vec![
        Layer::dense(input, hidden, rng),
        Layer::relu(),
        Layer::dense(hidden, NUM_CLASSES, rng),
        Layer::softmax(),
    ]
}

/// `stages × (Conv + ReLU + MaxPool)` followed by Flatten. Returns the layers
/// and the flattened width, or an error naming the stage that runs out of
/// spatial extent.
fn conv_stack<T: Real>(
    input: [usize; 3],
    filters: &[usize],
    arch: &Architecture,
    what: &str,
    rng: &mut Rng,
) -> Result<(Vec<Layer<T>>, usize)> {
    let mut layers = Vec::new();
    let mut shape = input.to_vec();
    for (stage, &f) in filters.iter().enumerate() {
        let conv = Layer::conv2d(arch.kernel, shape[2], f, rng);
        let pool = Layer::maxpool2d(arch.pool_window, arch.pool_stride);
        let next = conv
            .output_shape(&shape)
            .and_then(|s| pool.output_shape(&s))
            .map_err(|_| {
                Error::Model(format!(
                    "{what} {}x{} too small for {} conv/pool stages: insufficient spatial extent at stage {}",
                    input[0],
                    input[1],
                    filters.len(),
                    stage + 1
                ))
            })?;
        layers.extend([conv, Layer::relu(), pool]);
        shape = next;
    }
    layers.push(Layer::flatten());
    Ok((layers, shape.iter().product()))
}

fn require_width(d: usize) -> Result<()> {
    if d < 1 {
        return Err(Error::InvalidConfig("tabular width must be >= 1".into()));
    }
    Ok(())
}

fn image_dims(image: &ImageInput) -> Result<[usize; 3]> {
    match *image {
        ImageInput::Image {
            height,
            width,
            channels,
        } => Ok([height, width, channels]),
        _ => Err(Error::Model("this model needs a raw image input".into())),
    }
}

/// Side of the smallest square holding `d` cells.
pub fn square_side(d: usize) -> usize {
    let mut s = libm::sqrt(d as f64) as usize;
    while s * s < d {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= d {
        s -= 1;
    }
    s
}

/// Model 1: `Dense(D→300)+ReLU, Dense(300→120)+ReLU, Dense(120→4), Softmax`.
pub fn build_model_1<T: Real>(
    d: usize,
    arch: &Architecture,
    rng: &mut Rng,
) -> Result<ModelGraph<T>> {
    require_width(d)?;
    let tab = dense_stack(d, &arch.tabular_hidden, rng);
    let head = vec![
        Layer::dense(arch.tabular_hidden[1], NUM_CLASSES, rng),
        Layer::softmax(),
    ];
    ModelGraph::from_parts(tab, vec![d], None, head)
}

/// Model 2: dense tabular branch, passthrough of external embedding rows,
/// concat, then `Dense(→120)+ReLU, Dense(→4), Softmax`.
pub fn build_model_2<T: Real>(
    d: usize,
    provider: &EmbeddingProvider,
    arch: &Architecture,
    rng: &mut Rng,
) -> Result<ModelGraph<T>> {
    require_width(d)?;
    let e = match provider {
        EmbeddingProvider::ExternalFile { width, .. } if *width > 0 => *width,
        EmbeddingProvider::ExternalFile { path, .. } => {
            return Err(Error::Model(format!(
                "embedding file {path} has zero width"
            )))
        }
        EmbeddingProvider::InternalCnn => {
            return Err(Error::Model(
                "model 2 needs an external embedding file".into(),
            ))
        }
    };
    let tab = dense_stack(d, &arch.tabular_hidden, rng);
    let head = classifier_head(arch.tabular_hidden[1] + e, arch.head_hidden, rng);
    ModelGraph::from_parts(tab, vec![d], Some((Vec::new(), vec![e])), head)
}

/// Model 3: dense tabular branch; image branch of three conv/ReLU/pool
/// stages, Flatten and `Dense(→128)+ReLU`; concat; two-dense-layer head.
pub fn build_model_3<T: Real>(
    d: usize,
    image: [usize; 3],
    arch: &Architecture,
    rng: &mut Rng,
) -> Result<ModelGraph<T>> {
    require_width(d)?;
    let tab = dense_stack(d, &arch.tabular_hidden, rng);
    let (mut img, flat) = conv_stack(image, &arch.image_filters, arch, "image", rng)?;
    img.extend(dense_stack(flat, &[arch.branch_dense], rng));
    let head = classifier_head(
        arch.tabular_hidden[1] + arch.branch_dense,
        arch.head_hidden,
        rng,
    );
    ModelGraph::from_parts(tab, vec![d], Some((img, image.to_vec())), head)
}

fn tabular_conv_branch<T: Real>(
    d: usize,
    arch: &Architecture,
    rng: &mut Rng,
) -> Result<(Vec<Layer<T>>, usize)> {
    let s = square_side(d);
    let mut layers = vec![Layer::reshape(vec![s, s, 1])];
    let (conv, flat) = conv_stack(
        [s, s, 1],
        &arch.tabular_filters,
        arch,
        "tabular matrix",
        rng,
    )?;
    layers.extend(conv);
    Ok((layers, flat))
}

/// Model 4: tabular vector zero-padded to `S×S×1` through two conv stages;
/// image through three; both flattened and concatenated with no dense layer.
pub fn build_model_4<T: Real>(
    d: usize,
    image: [usize; 3],
    arch: &Architecture,
    rng: &mut Rng,
) -> Result<ModelGraph<T>> {
    require_width(d)?;
    let (tab, tab_flat) = tabular_conv_branch(d, arch, rng)?;
    let (img, img_flat) = conv_stack(image, &arch.image_filters, arch, "image", rng)?;
    let head = classifier_head(tab_flat + img_flat, arch.head_hidden, rng);
    ModelGraph::from_parts(tab, vec![d], Some((img, image.to_vec())), head)
}

/// Model 5: Model 4 with `Dense(→128)+ReLU` after each branch's Flatten.
pub fn build_model_5<T: Real>(
    d: usize,
    image: [usize; 3],
    arch: &Architecture,
    rng: &mut Rng,
) -> Result<ModelGraph<T>> {
    require_width(d)?;
    let (mut tab, tab_flat) = tabular_conv_branch(d, arch, rng)?;
    tab.extend(dense_stack(tab_flat, &[arch.branch_dense], rng));
    let (mut img, img_flat) = conv_stack(image, &arch.image_filters, arch, "image", rng)?;
    img.extend(dense_stack(img_flat, &[arch.branch_dense], rng));
    let head = classifier_head(2 * arch.branch_dense, arch.head_hidden, rng);
    ModelGraph::from_parts(tab, vec![d], Some((img, image.to_vec())), head)
}

/// Builds the graph described by `spec` with freshly initialized weights.
pub fn build_model<T: Real>(spec: &ModelSpec, rng: &mut Rng) -> Result<ModelGraph<T>> {
    let d = spec.tabular_width;
    match spec.id {
        ModelId::Unimodal => match spec.image {
            ImageInput::None => build_model_1(d, &spec.arch, rng),
            _ => Err(Error::Model("model 1 takes no image input".into())),
        },
        ModelId::ExternalEmbedding => match spec.image {
            ImageInput::Embedding { width } => build_model_2(
                d,
                &EmbeddingProvider::ExternalFile {
                    path: String::new(),
                    width,
                },
                &spec.arch,
                rng,
            ),
            _ => Err(Error::Model(
                "model 2 needs an external embedding file".into(),
            )),
        },
        ModelId::ConvImage => build_model_3(d, image_dims(&spec.image)?, &spec.arch, rng),
        ModelId::FullyConvolutional => build_model_4(d, image_dims(&spec.image)?, &spec.arch, rng),
        ModelId::ConvDense => build_model_5(d, image_dims(&spec.image)?, &spec.arch, rng),
    }
}

/// Dense classifier over fixed embeddings: `Dense(F→h)+ReLU, Dense(h→4), Softmax`.
pub fn build_dense_head<T: Real>(
    input: usize,
    hidden: usize,
    rng: &mut Rng,
) -> Result<ModelGraph<T>> {
    require_width(input)?;
    ModelGraph::from_parts(
        Vec::new(),
        vec![input],
        None,
        classifier_head(input, hidden, rng),
    )
}
