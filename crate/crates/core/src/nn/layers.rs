//! Layers with cached forward passes and exact analytic backward passes.
//!
//! All layers consume and produce batch-first tensors: `[B, n]` for vectors,
//! `[B, H, W, C]` for feature maps. Shapes reported by
//! [`Layer::output_shape`] are per sample, without the batch axis.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::Real;
use crate::tensor::Tensor;
use crate::tensor::{conv2d_backward_slice, conv2d_slice, maxpool_slice, window_out};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamRole {
    Weight,
    Bias,
}

impl ParamRole {
    pub fn name(self) -> &'static str {
        match self {
            ParamRole::Weight => "weight",
            ParamRole::Bias => "bias",
        }
    }
}

/// A trainable tensor together with its most recent gradient.
#[derive(Clone, Debug)]
pub struct Param<T: Real> {
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
    pub role: ParamRole,
}

impl<T: Real> Param<T> {
    pub fn new(value: Tensor<T>, role: ParamRole) -> Self {
        let grad = Tensor::zeros(value.shape().to_vec());
        Param { value, grad, role }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Dense,
    Conv2d,
    MaxPool2d,
    Flatten,
    Relu,
    Softmax,
    Concat,
    Reshape,
}

impl LayerKind {
    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Dense => "dense",
            LayerKind::Conv2d => "conv2d",
            LayerKind::MaxPool2d => "maxpool2d",
            LayerKind::Flatten => "flatten",
            LayerKind::Relu => "relu",
            LayerKind::Softmax => "softmax",
            LayerKind::Concat => "concat",
            LayerKind::Reshape => "reshape",
        }
    }
}

/// Glorot-uniform draw: `U(-l, l)` with `l = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<T: Real>(
    shape: &[usize],
    fan_in: usize,
    fan_out: usize,
    rng: &mut Rng,
) -> Tensor<T> {
    let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
    Tensor::from_fn(shape.to_vec(), |_| {
        T::from_f64(rng.uniform_range(-limit, limit))
    })
}

fn mismatch(op: &'static str, got: &[usize], want: Vec<usize>) -> Error {
    Error::ShapeMismatch {
        op,
        left: got.to_vec(),
        right: want,
    }
}

fn sample_dims(x: &[usize], op: &'static str, channels: usize) -> Result<[usize; 3]> {
    if x.len() != 4 || x[3] != channels {
        return Err(mismatch(op, x, vec![0, 0, 0, channels]));
    }
    Ok([x[1], x[2], x[3]])
}

/// Fully connected layer: `y = x W + b`, `W: [n, m]`, `b: [m]`.
#[derive(Clone, Debug)]
pub struct Dense<T: Real> {
    pub weight: Param<T>,
    pub bias: Param<T>,
    input: Option<Tensor<T>>,
}

impl<T: Real> Dense<T> {
    pub fn new(inputs: usize, outputs: usize, rng: &mut Rng) -> Self {
        let w = glorot_uniform(&[inputs, outputs], inputs, outputs, rng);
        Self::from_params(w, Tensor::zeros([outputs])).expect("consistent shapes")
    }

    pub fn from_params(weight: Tensor<T>, bias: Tensor<T>) -> Result<Self> {
        if weight.rank() != 2 || bias.shape() != [weight.shape()[1]] {
            return Err(mismatch(
                "dense params",
                weight.shape(),
                bias.shape().to_vec(),
            ));
        }
        Ok(Dense {
            weight: Param::new(weight, ParamRole::Weight),
            bias: Param::new(bias, ParamRole::Bias),
            input: None,
        })
    }

    pub fn inputs(&self) -> usize {
        self.weight.value.shape()[0]
    }

    pub fn outputs(&self) -> usize {
        self.weight.value.shape()[1]
    }

    fn compute(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (n, m) = (self.inputs(), self.outputs());
        if x.rank() != 2 || x.shape()[1] != n {
            return Err(mismatch("dense forward", x.shape(), vec![x.rows(), n]));
        }
        let b = x.rows();
        let w = self.weight.value.data();
        let mut out = Vec::with_capacity(b * m);
        let mut acc = vec![0.0f64; m];
        for r in 0..b {
            for (a, bias) in acc.iter_mut().zip(self.bias.value.data()) {
                *a = bias.as_f64();
            }
            for (i, xv) in x.row(r).iter().enumerate() {
                let xv = xv.as_f64();
                if xv == 0.0 {
                    continue;
                }
                for (a, wv) in acc.iter_mut().zip(&w[i * m..(i + 1) * m]) {
                    *a += xv * wv.as_f64();
                }
            }
            out.extend(acc.iter().map(|&v| T::from_f64(v)));
        }
        Tensor::new([b, m], out)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let x = self
            .input
            .take()
            .ok_or(Error::BackwardBeforeForward { layer: "dense" })?;
        let (n, m) = (self.inputs(), self.outputs());
        if dy.shape() != [x.rows(), m] {
            return Err(mismatch("dense backward", dy.shape(), vec![x.rows(), m]));
        }
        let b = x.rows();
        let w = self.weight.value.data();
        let mut dw = vec![0.0f64; n * m];
        let mut db = vec![0.0f64; m];
        let mut dx = Vec::with_capacity(b * n);
        for r in 0..b {
            let g = dy.row(r);
            for (d, gv) in db.iter_mut().zip(g) {
                *d += gv.as_f64();
            }
            for (i, xv) in x.row(r).iter().enumerate() {
                let xv = xv.as_f64();
                let wrow = &w[i * m..(i + 1) * m];
                let mut s = 0.0;
                for ((d, gv), wv) in dw[i * m..(i + 1) * m].iter_mut().zip(g).zip(wrow) {
                    let gv = gv.as_f64();
                    *d += xv * gv;
                    s += gv * wv.as_f64();
                }
                dx.push(T::from_f64(s));
            }
        }
        self.weight.grad = Tensor::new([n, m], dw.into_iter().map(T::from_f64).collect())?;
        self.bias.grad = Tensor::new([m], db.into_iter().map(T::from_f64).collect())?;
        Tensor::new([b, n], dx)
    }
}

/// Valid 2-D convolution with `K×K×C×F` kernels and per-filter bias.
#[derive(Clone, Debug)]
pub struct Conv2d<T: Real> {
    pub kernel: Param<T>,
    pub bias: Param<T>,
    pub stride: usize,
    input: Option<Tensor<T>>,
}

impl<T: Real> Conv2d<T> {
    pub fn new(kernel_size: usize, in_channels: usize, filters: usize, rng: &mut Rng) -> Self {
        let area = kernel_size * kernel_size;
        let k = glorot_uniform(
            &[kernel_size, kernel_size, in_channels, filters],
            area * in_channels,
            area * filters,
            rng,
        );
        Self::from_params(k, Tensor::zeros([filters]), 1).expect("consistent shapes")
    }

    pub fn from_params(kernel: Tensor<T>, bias: Tensor<T>, stride: usize) -> Result<Self> {
        let ks = kernel.shape();
        if ks.len() != 4 || ks[0] != ks[1] || bias.shape() != [ks[3]] || stride == 0 {
            return Err(mismatch("conv2d params", ks, bias.shape().to_vec()));
        }
        Ok(Conv2d {
            kernel: Param::new(kernel, ParamRole::Weight),
            bias: Param::new(bias, ParamRole::Bias),
            stride,
            input: None,
        })
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel.value.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.kernel.value.shape()[2]
    }

    pub fn filters(&self) -> usize {
        self.kernel.value.shape()[3]
    }

    fn out_dims(&self, [h, w]: [usize; 2]) -> Result<[usize; 2]> {
        let k = self.kernel_size();
        if k > h || k > w {
            return Err(Error::KernelTooLarge {
                kernel: k,
                height: h,
                width: w,
            });
        }
        Ok([window_out(h, k, self.stride), window_out(w, k, self.stride)])
    }

    fn compute(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let [h, w, c] = sample_dims(x.shape(), "conv2d forward", self.in_channels())?;
        let [oh, ow] = self.out_dims([h, w])?;
        let (k, f) = (self.kernel_size(), self.filters());
        let b = x.rows();
        let per = oh * ow * f;
        let mut out = vec![T::zero(); b * per];
        for (r, o) in out.chunks_mut(per.max(1)).enumerate().take(b) {
            conv2d_slice(
                x.row(r),
                [h, w, c],
                self.kernel.value.data(),
                k,
                f,
                self.stride,
                Some(self.bias.value.data()),
                o,
            );
        }
        Tensor::new([b, oh, ow, f], out)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let x = self
            .input
            .take()
            .ok_or(Error::BackwardBeforeForward { layer: "conv2d" })?;
        let [h, w, c] = sample_dims(x.shape(), "conv2d backward", self.in_channels())?;
        let [oh, ow] = self.out_dims([h, w])?;
        let (k, f) = (self.kernel_size(), self.filters());
        let b = x.rows();
        if dy.shape() != [b, oh, ow, f] {
            return Err(mismatch("conv2d backward", dy.shape(), vec![b, oh, ow, f]));
        }
        let mut dk = vec![0.0f64; self.kernel.value.len()];
        let mut db = vec![0.0f64; f];
        let mut dx = Vec::with_capacity(x.len());
        let mut dx_s = vec![0.0f64; h * w * c];
        for r in 0..b {
            dx_s.iter_mut().for_each(|v| *v = 0.0);
            conv2d_backward_slice(
                x.row(r),
                [h, w, c],
                self.kernel.value.data(),
                k,
                f,
                self.stride,
                dy.row(r),
                &mut dx_s,
                &mut dk,
                &mut db,
            );
            dx.extend(dx_s.iter().map(|&v| T::from_f64(v)));
        }
        self.kernel.grad = Tensor::new(
            self.kernel.value.shape().to_vec(),
            dk.into_iter().map(T::from_f64).collect(),
        )?;
        self.bias.grad = Tensor::new([f], db.into_iter().map(T::from_f64).collect())?;
        Tensor::new(x.shape().to_vec(), dx)
    }
}

#[derive(Clone, Debug)]
pub struct MaxPool2d {
    pub window: usize,
    pub stride: usize,
    cache: Option<(Vec<usize>, Vec<usize>)>,
}

impl MaxPool2d {
    pub fn new(window: usize, stride: usize) -> Self {
        MaxPool2d {
            window,
            stride,
            cache: None,
        }
    }

    fn out_dims(&self, [h, w]: [usize; 2]) -> Result<[usize; 2]> {
        if self.window > h || self.window > w {
            return Err(Error::WindowTooLarge {
                window: self.window,
                height: h,
                width: w,
            });
        }
        Ok([
            window_out(h, self.window, self.stride),
            window_out(w, self.window, self.stride),
        ])
    }

    /// Returns the pooled batch and flat argmax indices into `x`.
    fn compute<T: Real>(&self, x: &Tensor<T>) -> Result<(Tensor<T>, Vec<usize>)> {
        if x.rank() != 4 {
            return Err(mismatch("maxpool2d forward", x.shape(), vec![0, 0, 0, 0]));
        }
        let [h, w, c] = [x.shape()[1], x.shape()[2], x.shape()[3]];
        let [oh, ow] = self.out_dims([h, w])?;
        let b = x.rows();
        let per = oh * ow * c;
        let mut out = vec![T::zero(); b * per];
        let mut idx = vec![0usize; b * per];
        for r in 0..b {
            let range = r * per..(r + 1) * per;
            maxpool_slice(
                x.row(r),
                [h, w, c],
                self.window,
                self.stride,
                &mut out[range.clone()],
                &mut idx[range.clone()],
            );
            let base = r * h * w * c;
            idx[range].iter_mut().for_each(|i| *i += base);
        }
        Ok((Tensor::new([b, oh, ow, c], out)?, idx))
    }

    fn backward<T: Real>(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let (idx, in_shape) = self
            .cache
            .take()
            .ok_or(Error::BackwardBeforeForward { layer: "maxpool2d" })?;
        if dy.len() != idx.len() {
            return Err(mismatch("maxpool2d backward", dy.shape(), vec![idx.len()]));
        }
        let mut grad = Tensor::zeros(in_shape);
        let g = grad.data_mut();
        for (&src, &u) in idx.iter().zip(dy.data()) {
            g[src] += u;
        }
        Ok(grad)
    }
}

/// `[B, ...] -> [B, prod(...)]`.
#[derive(Clone, Debug, Default)]
pub struct Flatten {
    input_shape: Option<Vec<usize>>,
}

/// Elementwise `max(x, 0)`; gradient 0 at and below zero.
#[derive(Clone, Debug, Default)]
pub struct Relu {
    mask: Option<(Vec<usize>, Vec<bool>)>,
}

/// Row-wise softmax over the last axis.
#[derive(Clone, Debug, Default)]
pub struct Softmax<T: Real> {
    output: Option<Tensor<T>>,
}

pub(crate) fn softmax_rows<T: Real>(x: &Tensor<T>) -> Result<Tensor<T>> {
    if x.rank() != 2 {
        return Err(mismatch("softmax", x.shape(), vec![x.rows(), 0]));
    }
    let w = x.shape()[1];
    let mut out = Vec::with_capacity(x.len());
    for r in 0..x.rows() {
        let row = x.row(r);
        let max = row
            .iter()
            .map(|v| v.as_f64())
            .fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|v| libm::exp(v.as_f64() - max)).collect();
        let s: f64 = exps.iter().sum();
        out.extend(exps.iter().map(|e| T::from_f64(e / s)));
    }
    Tensor::new([x.rows(), w], out)
}

/// Zero-pads each row of `[B, n]` to `prod(target)` and reshapes to
/// `[B, target...]`. With `prod(target) == n` it is a plain reshape.
#[derive(Clone, Debug)]
pub struct Reshape {
    pub target: Vec<usize>,
    input_shape: Option<Vec<usize>>,
}

impl Reshape {
    pub fn new(target: Vec<usize>) -> Self {
        Reshape {
            target,
            input_shape: None,
        }
    }

    fn compute<T: Real>(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let n = x.row_len();
        let cells: usize = self.target.iter().product();
        if x.rank() < 2 || n > cells {
            return Err(mismatch("reshape forward", x.shape(), self.target.clone()));
        }
        let b = x.rows();
        let mut data = Vec::with_capacity(b * cells);
        for r in 0..b {
            data.extend_from_slice(x.row(r));
            data.extend(core::iter::repeat_n(T::zero(), cells - n));
        }
        let mut shape = vec![b];
        shape.extend_from_slice(&self.target);
        Tensor::new(shape, data)
    }

    fn backward<T: Real>(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        let in_shape = self
            .input_shape
            .take()
            .ok_or(Error::BackwardBeforeForward { layer: "reshape" })?;
        let n: usize = in_shape[1..].iter().product();
        let b = in_shape[0];
        if dy.rows() != b || dy.row_len() < n {
            return Err(mismatch("reshape backward", dy.shape(), in_shape));
        }
        let mut data = Vec::with_capacity(b * n);
        for r in 0..b {
            data.extend_from_slice(&dy.row(r)[..n]);
        }
        Tensor::new(in_shape, data)
    }
}

/// One node of a branch or head.
#[derive(Clone, Debug)]
pub enum Layer<T: Real = f32> {
    Dense(Dense<T>),
    Conv2d(Conv2d<T>),
    MaxPool2d(MaxPool2d),
    Flatten(Flatten),
    Relu(Relu),
    Softmax(Softmax<T>),
    Reshape(Reshape),
}

impl<T: Real> Layer<T> {
    pub fn dense(inputs: usize, outputs: usize, rng: &mut Rng) -> Self {
        Layer::Dense(Dense::new(inputs, outputs, rng))
    }

    pub fn conv2d(kernel: usize, in_channels: usize, filters: usize, rng: &mut Rng) -> Self {
        Layer::Conv2d(Conv2d::new(kernel, in_channels, filters, rng))
    }

    pub fn maxpool2d(window: usize, stride: usize) -> Self {
        Layer::MaxPool2d(MaxPool2d::new(window, stride))
    }

    pub fn flatten() -> Self {
        Layer::Flatten(Flatten::default())
    }

    pub fn relu() -> Self {
        Layer::Relu(Relu::default())
    }

    pub fn softmax() -> Self {
        Layer::Softmax(Softmax { output: None })
    }

    pub fn reshape(target: Vec<usize>) -> Self {
        Layer::Reshape(Reshape::new(target))
    }

    pub fn kind(&self) -> LayerKind {
        match self {
            Layer::Dense(_) => LayerKind::Dense,
            Layer::Conv2d(_) => LayerKind::Conv2d,
            Layer::MaxPool2d(_) => LayerKind::MaxPool2d,
            Layer::Flatten(_) => LayerKind::Flatten,
            Layer::Relu(_) => LayerKind::Relu,
            Layer::Softmax(_) => LayerKind::Softmax,
            Layer::Reshape(_) => LayerKind::Reshape,
        }
    }

    /// Human-readable one-liner used in manifests.
    pub fn describe(&self) -> String {
        match self {
            Layer::Dense(d) => format!("dense {}->{}", d.inputs(), d.outputs()),
            Layer::Conv2d(c) => format!(
                "conv2d k{} {}->{} stride {}",
                c.kernel_size(),
                c.in_channels(),
                c.filters(),
                c.stride
            ),
            Layer::MaxPool2d(p) => format!("maxpool2d window {} stride {}", p.window, p.stride),
            Layer::Flatten(_) => "flatten".into(),
            Layer::Relu(_) => "relu".into(),
            Layer::Softmax(_) => "softmax".into(),
            Layer::Reshape(r) => format!("reshape {:?}", r.target),
        }
    }

    /// Per-sample output shape for a per-sample input shape.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match self {
            Layer::Dense(d) => {
                if input != [d.inputs()] {
                    return Err(mismatch("dense", input, vec![d.inputs()]));
                }
                Ok(vec![d.outputs()])
            }
            Layer::Conv2d(c) => {
                if input.len() != 3 || input[2] != c.in_channels() {
                    return Err(mismatch("conv2d", input, vec![0, 0, c.in_channels()]));
                }
                let [oh, ow] = c.out_dims([input[0], input[1]])?;
                Ok(vec![oh, ow, c.filters()])
            }
            Layer::MaxPool2d(p) => {
                if input.len() != 3 {
                    return Err(mismatch("maxpool2d", input, vec![0, 0, 0]));
                }
                let [oh, ow] = p.out_dims([input[0], input[1]])?;
                Ok(vec![oh, ow, input[2]])
            }
            Layer::Flatten(_) => Ok(vec![input.iter().product()]),
            Layer::Relu(_) => Ok(input.to_vec()),
            Layer::Softmax(_) => {
                if input.len() != 1 {
                    return Err(mismatch("softmax", input, vec![0]));
                }
                Ok(input.to_vec())
            }
            Layer::Reshape(r) => {
                let n: usize = input.iter().product();
                if n > r.target.iter().product() {
                    return Err(mismatch("reshape", input, r.target.clone()));
                }
                Ok(r.target.clone())
            }
        }
    }

    /// Pure forward pass; caches nothing.
    pub fn infer(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        match self {
            Layer::Dense(d) => d.compute(x),
            Layer::Conv2d(c) => c.compute(x),
            Layer::MaxPool2d(p) => Ok(p.compute(x)?.0),
            Layer::Flatten(_) => x.reshape([x.rows(), x.row_len()]),
            Layer::Relu(_) => Ok(x.map(|v| if v > T::zero() { v } else { T::zero() })),
            Layer::Softmax(_) => softmax_rows(x),
            Layer::Reshape(r) => r.compute(x),
        }
    }

    /// Forward pass that keeps what [`Layer::backward`] needs.
    pub fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        match self {
            Layer::Dense(d) => {
                let y = d.compute(x)?;
                d.input = Some(x.clone());
                Ok(y)
            }
            Layer::Conv2d(c) => {
                let y = c.compute(x)?;
                c.input = Some(x.clone());
                Ok(y)
            }
            Layer::MaxPool2d(p) => {
                let (y, idx) = p.compute(x)?;
                p.cache = Some((idx, x.shape().to_vec()));
                Ok(y)
            }
            Layer::Flatten(f) => {
                f.input_shape = Some(x.shape().to_vec());
                x.reshape([x.rows(), x.row_len()])
            }
            Layer::Relu(r) => {
                let mask: Vec<bool> = x.data().iter().map(|&v| v > T::zero()).collect();
                r.mask = Some((x.shape().to_vec(), mask));
                Ok(x.map(|v| if v > T::zero() { v } else { T::zero() }))
            }
            Layer::Softmax(s) => {
                let y = softmax_rows(x)?;
                s.output = Some(y.clone());
                Ok(y)
            }
            Layer::Reshape(r) => {
                let y = r.compute(x)?;
                r.input_shape = Some(x.shape().to_vec());
                Ok(y)
            }
        }
    }

    /// Gradient with respect to the input; parameter gradients are stored in
    /// the layer's [`Param::grad`] fields (overwritten, not accumulated).
    pub fn backward(&mut self, dy: &Tensor<T>) -> Result<Tensor<T>> {
        match self {
            Layer::Dense(d) => d.backward(dy),
            Layer::Conv2d(c) => c.backward(dy),
            Layer::MaxPool2d(p) => p.backward(dy),
            Layer::Flatten(f) => {
                let shape = f
                    .input_shape
                    .take()
                    .ok_or(Error::BackwardBeforeForward { layer: "flatten" })?;
                dy.reshape(shape)
            }
            Layer::Relu(r) => {
                let (shape, mask) = r
                    .mask
                    .take()
                    .ok_or(Error::BackwardBeforeForward { layer: "relu" })?;
                if dy.shape() != shape.as_slice() {
                    return Err(mismatch("relu backward", dy.shape(), shape));
                }
                let data = dy
                    .data()
                    .iter()
                    .zip(&mask)
                    .map(|(&g, &m)| if m { g } else { T::zero() })
                    .collect();
                Tensor::new(shape, data)
            }
            Layer::Softmax(s) => {
                let y = s
                    .output
                    .take()
                    .ok_or(Error::BackwardBeforeForward { layer: "softmax" })?;
                if dy.shape() != y.shape() {
                    return Err(mismatch("softmax backward", dy.shape(), y.shape().to_vec()));
                }
                let w = y.shape()[1];
                let mut out = Vec::with_capacity(y.len());
                for r in 0..y.rows() {
                    let (p, g) = (y.row(r), dy.row(r));
                    let dot: f64 = p.iter().zip(g).map(|(a, b)| a.as_f64() * b.as_f64()).sum();
                    out.extend(
                        p.iter()
                            .zip(g)
                            .map(|(a, b)| T::from_f64(a.as_f64() * (b.as_f64() - dot))),
                    );
                }
                Tensor::new([y.rows(), w], out)
            }
            Layer::Reshape(r) => r.backward(dy),
        }
    }

    pub fn params(&self) -> Vec<&Param<T>> {
        match self {
            Layer::Dense(d) => vec![&d.weight, &d.bias],
            Layer::Conv2d(c) => vec![&c.kernel, &c.bias],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        match self {
            Layer::Dense(d) => vec![&mut d.weight, &mut d.bias],
            Layer::Conv2d(c) => vec![&mut c.kernel, &mut c.bias],
            _ => Vec::new(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }
}
