use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::nn::{L1Placement, Layer, LayerKind, Param, ParamRole};
use crate::scalar::Real;
use crate::tensor::{concat_columns, split_columns, Tensor};

/// Branch a layer belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Section {
    Tabular,
    Image,
    Head,
}

impl Section {
    pub fn name(self) -> &'static str {
        match self {
            Section::Tabular => "tabular",
            Section::Image => "image",
            Section::Head => "head",
        }
    }
}

/// Inputs for one batch. `image` is an `[B, H, W, C]` stack for conv models,
/// an `[B, E]` embedding matrix for Model 2, and absent for unimodal graphs.
#[derive(Clone, Copy, Debug)]
pub struct ModelInput<'a, T: Real> {
    pub tabular: &'a Tensor<T>,
    pub image: Option<&'a Tensor<T>>,
}

/// Output of a pure forward pass.
#[derive(Clone, Debug)]
pub struct Inference<T: Real> {
    pub fused: Tensor<T>,
    pub probs: Tensor<T>,
}

/// Two-branch late-fusion network.
///
/// Unimodal graphs have no image branch and the fusion node is the identity,
/// so the fused activation is the tabular branch output.
#[derive(Clone, Debug)]
pub struct ModelGraph<T: Real = f32> {
    tabular: Vec<Layer<T>>,
    image: Option<Vec<Layer<T>>>,
    head: Vec<Layer<T>>,
    tabular_input: Vec<usize>,
    image_input: Option<Vec<usize>>,
    fused_widths: [usize; 2],
}

fn walk<T: Real>(layers: &[Layer<T>], input: &[usize]) -> Result<Vec<Vec<usize>>> {
    let mut shapes = Vec::with_capacity(layers.len());
    let mut cur = input.to_vec();
    for l in layers {
        cur = l.output_shape(&cur)?;
        shapes.push(cur.clone());
    }
    Ok(shapes)
}

fn branch_width<T: Real>(layers: &[Layer<T>], input: &[usize]) -> Result<usize> {
    let out = walk(layers, input)?.pop().unwrap_or_else(|| input.to_vec());
    if out.len() != 1 {
        return Err(Error::Model(format!(
            "branch must end in a vector, got shape {out:?}"
        )));
    }
    Ok(out[0])
}

impl<T: Real> ModelGraph<T> {
    /// Assembles a graph and checks every shape statically.
    pub fn from_parts(
        tabular: Vec<Layer<T>>,
        tabular_input: Vec<usize>,
        image: Option<(Vec<Layer<T>>, Vec<usize>)>,
        head: Vec<Layer<T>>,
    ) -> Result<Self> {
        let tw = branch_width(&tabular, &tabular_input)?;
        let (image, image_input, iw) = match image {
            Some((layers, shape)) => {
                let w = branch_width(&layers, &shape)?;
                (Some(layers), Some(shape), w)
            }
            None => (None, None, 0),
        };
        let out = walk(&head, &[tw + iw])?;
        match (head.last().map(|l| l.kind()), out.last()) {
            (Some(LayerKind::Softmax), Some(s)) if s.as_slice() == [crate::NUM_CLASSES] => {}
            _ => {
                return Err(Error::Model(format!(
                    "head must end in a {}-way softmax",
                    crate::NUM_CLASSES
                )))
            }
        }
        Ok(ModelGraph {
            tabular,
            image,
            head,
            tabular_input,
            image_input,
            fused_widths: [tw, iw],
        })
    }

    pub fn tabular_layers(&self) -> &[Layer<T>] {
        &self.tabular
    }

    pub fn image_layers(&self) -> Option<&[Layer<T>]> {
        self.image.as_deref()
    }

    pub fn head_layers(&self) -> &[Layer<T>] {
        &self.head
    }

    pub fn tabular_input(&self) -> &[usize] {
        &self.tabular_input
    }

    pub fn image_input(&self) -> Option<&[usize]> {
        self.image_input.as_deref()
    }

    pub fn is_multimodal(&self) -> bool {
        self.image.is_some()
    }

    /// Width of the fused (concatenated) activation.
    pub fn fused_width(&self) -> usize {
        self.fused_widths[0] + self.fused_widths[1]
    }

    /// Widths of the tabular and image parts of the fused activation.
    pub fn fused_parts(&self) -> [usize; 2] {
        self.fused_widths
    }

    /// All layers with their section, in parameter visit order.
    pub fn layers(&self) -> impl Iterator<Item = (Section, &Layer<T>)> {
        self.tabular
            .iter()
            .map(|l| (Section::Tabular, l))
            .chain(self.image.iter().flatten().map(|l| (Section::Image, l)))
            .chain(self.head.iter().map(|l| (Section::Head, l)))
    }

    /// Per-sample output shape of every layer, from static shape inference.
    pub fn shape_walk(&self) -> Result<Vec<(Section, String, Vec<usize>)>> {
        let mut out = Vec::new();
        for (l, s) in self
            .tabular
            .iter()
            .zip(walk(&self.tabular, &self.tabular_input)?)
        {
            out.push((Section::Tabular, l.describe(), s));
        }
        if let (Some(layers), Some(input)) = (&self.image, &self.image_input) {
            for (l, s) in layers.iter().zip(walk(layers, input)?) {
                out.push((Section::Image, l.describe(), s));
            }
        }
        for (l, s) in self
            .head
            .iter()
            .zip(walk(&self.head, &[self.fused_width()])?)
        {
            out.push((Section::Head, l.describe(), s));
        }
        Ok(out)
    }

    pub fn params(&self) -> Vec<&Param<T>> {
        self.layers().flat_map(|(_, l)| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        self.tabular
            .iter_mut()
            .chain(self.image.iter_mut().flatten())
            .chain(self.head.iter_mut())
            .flat_map(|l| l.params_mut())
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    /// Mask over [`params`](Self::params) of the tensors carrying the L1 term.
    pub fn l1_mask(&self, placement: L1Placement) -> Vec<bool> {
        let params = self.params();
        let mut mask: Vec<bool> = params.iter().map(|p| p.role == ParamRole::Weight).collect();
        if placement == L1Placement::OutputLayer {
            let last = mask.iter().rposition(|&m| m);
            for (i, m) in mask.iter_mut().enumerate() {
                *m = Some(i) == last;
            }
        }
        mask
    }

    /// Weight tensors selected by `placement`.
    pub fn l1_weights(&self, placement: L1Placement) -> Vec<&Tensor<T>> {
        self.params()
            .into_iter()
            .zip(self.l1_mask(placement))
            .filter(|(_, m)| *m)
            .map(|(p, _)| &p.value)
            .collect()
    }

    fn check_input(&self, input: &ModelInput<'_, T>) -> Result<usize> {
        let n = input.tabular.rows();
        if input.tabular.shape()[1..] != self.tabular_input[..] {
            return Err(Error::ShapeMismatch {
                op: "model tabular input",
                left: input.tabular.shape().to_vec(),
                right: self.tabular_input.clone(),
            });
        }
        match (&self.image_input, input.image) {
            (None, None) => {}
            (Some(expect), Some(img)) => {
                if img.shape()[1..] != expect[..] || img.rows() != n {
                    return Err(Error::ShapeMismatch {
                        op: "model image input",
                        left: img.shape().to_vec(),
                        right: expect.clone(),
                    });
                }
            }
            (Some(_), None) => return Err(Error::Model("model needs an image input".into())),
            (None, Some(_)) => {
                return Err(Error::Model("unimodal model got an image input".into()))
            }
        }
        Ok(n)
    }

    fn run(layers: &[Layer<T>], x: &Tensor<T>) -> Result<Tensor<T>> {
        let mut cur = x.clone();
        for l in layers {
            cur = l.infer(&cur)?;
        }
        Ok(cur)
    }

    fn run_cached(layers: &mut [Layer<T>], x: &Tensor<T>) -> Result<Tensor<T>> {
        let mut cur = x.clone();
        for l in layers {
            cur = l.forward(&cur)?;
        }
        Ok(cur)
    }

    fn fuse(&self, tab: Tensor<T>, img: Option<Tensor<T>>) -> Result<Tensor<T>> {
        let tab = tab.reshape([tab.rows(), tab.row_len()])?;
        match img {
            Some(i) => {
                let i = i.reshape([i.rows(), i.row_len()])?;
                concat_columns(&[&tab, &i])
            }
            None => Ok(tab),
        }
    }

    /// Pure forward pass returning fused activations and probabilities.
    pub fn infer(&self, input: ModelInput<'_, T>) -> Result<Inference<T>> {
        self.check_input(&input)?;
        let tab = Self::run(&self.tabular, input.tabular)?;
        let img = match (&self.image, input.image) {
            (Some(layers), Some(x)) => Some(Self::run(layers, x)?),
            _ => None,
        };
        let fused = self.fuse(tab, img)?;
        let probs = Self::run(&self.head, &fused)?;
        Ok(Inference { fused, probs })
    }

    /// Training forward pass; caches activations for backward.
    pub fn forward(&mut self, input: ModelInput<'_, T>) -> Result<Tensor<T>> {
        self.check_input(&input)?;
        let tab = Self::run_cached(&mut self.tabular, input.tabular)?;
        let img = match (&mut self.image, input.image) {
            (Some(layers), Some(x)) => Some(Self::run_cached(layers, x)?),
            _ => None,
        };
        let fused = self.fuse(tab, img)?;
        Self::run_cached(&mut self.head, &fused)
    }

    fn backward_branches(&mut self, d_fused: Tensor<T>) -> Result<()> {
        let [tw, iw] = self.fused_widths;
        let (d_tab, d_img) = if self.image.is_some() {
            let mut parts = split_columns(&d_fused, &[tw, iw])?;
            let d_img = parts.pop();
            (parts.pop().expect("two parts"), d_img)
        } else {
            (d_fused, None)
        };
        let mut g = d_tab;
        for l in self.tabular.iter_mut().rev() {
            g = l.backward(&g)?;
        }
        if let (Some(layers), Some(mut g)) = (self.image.as_mut(), d_img) {
            for l in layers.iter_mut().rev() {
                g = l.backward(&g)?;
            }
        }
        Ok(())
    }

    /// Backward pass from a gradient on the output probabilities.
    pub fn backward(&mut self, d_probs: &Tensor<T>) -> Result<()> {
        let mut g = d_probs.clone();
        for l in self.head.iter_mut().rev() {
            g = l.backward(&g)?;
        }
        self.backward_branches(g)
    }

    /// Backward pass from a gradient on the pre-softmax logits; the final
    /// softmax is skipped (its cache is dropped).
    pub fn backward_from_logits(&mut self, d_logits: &Tensor<T>) -> Result<()> {
        let (last, rest) = self.head.split_last_mut().expect("head is never empty");
        if let Layer::Softmax(_) = last {
            // Consume the cache so a stray backward still errors.
            let _ = last.backward(&Tensor::zeros(d_logits.shape().to_vec()));
        }
        let mut g = d_logits.clone();
        for l in rest.iter_mut().rev() {
            g = l.backward(&g)?;
        }
        self.backward_branches(g)
    }

    /// Converts every parameter to another element type.
    pub fn cast<U: Real>(&self) -> ModelGraph<U> {
        fn conv<T: Real, U: Real>(layers: &[Layer<T>]) -> Vec<Layer<U>> {
            layers.iter().map(cast_layer).collect()
        }
        ModelGraph {
            tabular: conv(&self.tabular),
            image: self.image.as_ref().map(|l| conv(l)),
            head: conv(&self.head),
            tabular_input: self.tabular_input.clone(),
            image_input: self.image_input.clone(),
            fused_widths: self.fused_widths,
        }
    }

    /// Replaces parameter values in visit order, checking shapes.
    pub fn load_params(&mut self, values: Vec<Tensor<T>>) -> Result<()> {
        let mut params = self.params_mut();
        if params.len() != values.len() {
            return Err(Error::Model(format!(
                "expected {} parameter tensors, got {}",
                params.len(),
                values.len()
            )));
        }
        for (p, v) in params.iter_mut().zip(values) {
            if p.value.shape() != v.shape() {
                return Err(Error::ShapeMismatch {
                    op: "load_params",
                    left: p.value.shape().to_vec(),
                    right: v.shape().to_vec(),
                });
            }
            p.value = v;
        }
        Ok(())
    }
}

fn cast_layer<T: Real, U: Real>(l: &Layer<T>) -> Layer<U> {
    use crate::nn::{Conv2d, Dense};
    match l {
        Layer::Dense(d) => Layer::Dense(
            Dense::from_params(d.weight.value.cast(), d.bias.value.cast()).expect("valid shapes"),
        ),
        Layer::Conv2d(c) => Layer::Conv2d(
            Conv2d::from_params(c.kernel.value.cast(), c.bias.value.cast(), c.stride)
                .expect("valid shapes"),
        ),
        Layer::MaxPool2d(p) => Layer::maxpool2d(p.window, p.stride),
        Layer::Flatten(_) => Layer::flatten(),
        Layer::Relu(_) => Layer::relu(),
        Layer::Softmax(_) => Layer::softmax(),
        Layer::Reshape(r) => Layer::reshape(r.target.clone()),
    }
}

/// Fused activations for every row of `input`, evaluated in chunks.
pub fn extract_fused<T: Real>(
    model: &ModelGraph<T>,
    input: ModelInput<'_, T>,
    chunk: usize,
) -> Result<Tensor<T>> {
    let n = input.tabular.rows();
    let width = model.fused_width();
    let mut data = Vec::with_capacity(n * width);
    let chunk = chunk.max(1);
    let mut start = 0;
    while start < n {
        let idx: Vec<usize> = (start..(start + chunk).min(n)).collect();
        let tab = input.tabular.select_rows(&idx)?;
        let img = input.image.map(|t| t.select_rows(&idx)).transpose()?;
        let out = model.infer(ModelInput {
            tabular: &tab,
            image: img.as_ref(),
        })?;
        data.extend_from_slice(out.fused.data());
        start += chunk;
    }
    Tensor::new(vec![n, width], data)
}

/// Class probabilities for every row of `input`, evaluated in chunks.
pub fn predict_probs<T: Real>(
    model: &ModelGraph<T>,
    input: ModelInput<'_, T>,
    chunk: usize,
) -> Result<Tensor<T>> {
    let n = input.tabular.rows();
    let mut data = Vec::with_capacity(n * crate::NUM_CLASSES);
    let chunk = chunk.max(1);
    let mut start = 0;
    while start < n {
        let idx: Vec<usize> = (start..(start + chunk).min(n)).collect();
        let tab = input.tabular.select_rows(&idx)?;
        let img = input.image.map(|t| t.select_rows(&idx)).transpose()?;
        let out = model.infer(ModelInput {
            tabular: &tab,
            image: img.as_ref(),
        })?;
        data.extend_from_slice(out.probs.data());
        start += chunk;
    }
    Tensor::new(vec![n, crate::NUM_CLASSES], data)
}
