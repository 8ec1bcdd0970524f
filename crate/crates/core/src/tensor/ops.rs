use alloc::vec;
use alloc::vec::Vec;

use super::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn expect_rank<T: Real>(t: &Tensor<T>, rank: usize, op: &'static str) -> Result<()> {
    if t.rank() != rank {
        return Err(Error::InvalidShape {
            shape: t.shape().to_vec(),
            reason: alloc::format!("{op} expects rank {rank}"),
        });
    }
    Ok(())
}

fn same_shape<T: Real>(a: &Tensor<T>, b: &Tensor<T>, op: &'static str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            op,
            left: a.shape().to_vec(),
            right: b.shape().to_vec(),
        });
    }
    Ok(())
}

/// Matrix product of `[m, k]` by `[k, n]`, accumulated in `f64`.
pub fn matmul<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    expect_rank(a, 2, "matmul")?;
    expect_rank(b, 2, "matmul")?;
    let (m, k) = (a.shape()[0], a.shape()[1]);
    let (k2, n) = (b.shape()[0], b.shape()[1]);
    if k != k2 {
        return Err(Error::ShapeMismatch {
            op: "matmul",
            left: a.shape().to_vec(),
            right: b.shape().to_vec(),
        });
    }
    let mut out = Vec::with_capacity(m * n);
    let mut acc = vec![0.0f64; n];
    let (ad, bd) = (a.data(), b.data());
    for i in 0..m {
        acc.iter_mut().for_each(|v| *v = 0.0);
        for p in 0..k {
            let x = ad[i * k + p].as_f64();
            if x == 0.0 {
                continue;
            }
            for (s, &w) in acc.iter_mut().zip(&bd[p * n..(p + 1) * n]) {
                *s += x * w.as_f64();
            }
        }
        out.extend(acc.iter().map(|&v| T::from_f64(v)));
    }
    Tensor::new([m, n], out)
}

/// Transpose of a rank-2 tensor.
pub fn transpose<T: Real>(a: &Tensor<T>) -> Result<Tensor<T>> {
    expect_rank(a, 2, "transpose")?;
    let (m, n) = (a.shape()[0], a.shape()[1]);
    let d = a.data();
    Ok(Tensor::from_fn([n, m], |idx| {
        let (j, i) = (idx / m, idx % m);
        d[i * n + j]
    }))
}

/// Spatial output extent of a valid window sweep.
#[inline]
pub fn window_out(extent: usize, window: usize, stride: usize) -> usize {
    (extent - window) / stride + 1
}

/// Valid cross-correlation of an `H×W×C` input with `K×K×C×F` kernels.
pub fn conv2d<T: Real>(input: &Tensor<T>, kernels: &Tensor<T>, stride: usize) -> Result<Tensor<T>> {
    expect_rank(input, 3, "conv2d")?;
    expect_rank(kernels, 4, "conv2d")?;
    let [h, w, c] = [input.shape()[0], input.shape()[1], input.shape()[2]];
    let ks = kernels.shape();
    if ks[0] != ks[1] || ks[2] != c {
        return Err(Error::ShapeMismatch {
            op: "conv2d",
            left: input.shape().to_vec(),
            right: ks.to_vec(),
        });
    }
    if stride == 0 {
        return Err(Error::InvalidConfig(
            "conv2d stride must be positive".into(),
        ));
    }
    let (k, f) = (ks[0], ks[3]);
    if k > h || k > w {
        return Err(Error::KernelTooLarge {
            kernel: k,
            height: h,
            width: w,
        });
    }
    let (oh, ow) = (window_out(h, k, stride), window_out(w, k, stride));
    let mut out = vec![T::zero(); oh * ow * f];
    conv2d_slice(
        input.data(),
        [h, w, c],
        kernels.data(),
        k,
        f,
        stride,
        None,
        &mut out,
    );
    Tensor::new([oh, ow, f], out)
}

/// Single-sample convolution on raw slices. `out` has `oh*ow*f` elements.
#[allow(clippy::too_many_arguments)]
pub(crate) fn conv2d_slice<T: Real>(
    input: &[T],
    [h, w, c]: [usize; 3],
    kernel: &[T],
    k: usize,
    f: usize,
    stride: usize,
    bias: Option<&[T]>,
    out: &mut [T],
) {
    let (oh, ow) = (window_out(h, k, stride), window_out(w, k, stride));
    let mut acc = vec![0.0f64; f];
    for i in 0..oh {
        for j in 0..ow {
            match bias {
                Some(b) => acc.iter_mut().zip(b).for_each(|(a, &b)| *a = b.as_f64()),
                None => acc.iter_mut().for_each(|a| *a = 0.0),
            }
            for ki in 0..k {
                let row = (i * stride + ki) * w;
                for kj in 0..k {
                    let base = (row + j * stride + kj) * c;
                    for ch in 0..c {
                        let x = input[base + ch].as_f64();
                        if x == 0.0 {
                            continue;
                        }
                        let kb = ((ki * k + kj) * c + ch) * f;
                        for (a, &kv) in acc.iter_mut().zip(&kernel[kb..kb + f]) {
                            *a += x * kv.as_f64();
                        }
                    }
                }
            }
            let ob = (i * ow + j) * f;
            for (o, &a) in out[ob..ob + f].iter_mut().zip(&acc) {
                *o = T::from_f64(a);
            }
        }
    }
}

/// Accumulates single-sample convolution gradients into `f64` buffers.
#[allow(clippy::too_many_arguments)]
pub(crate) fn conv2d_backward_slice<T: Real>(
    input: &[T],
    [h, w, c]: [usize; 3],
    kernel: &[T],
    k: usize,
    f: usize,
    stride: usize,
    upstream: &[T],
    dx: &mut [f64],
    dk: &mut [f64],
    db: &mut [f64],
) {
    let (oh, ow) = (window_out(h, k, stride), window_out(w, k, stride));
    let mut dy = vec![0.0f64; f];
    for i in 0..oh {
        for j in 0..ow {
            let ob = (i * ow + j) * f;
            for (d, &u) in dy.iter_mut().zip(&upstream[ob..ob + f]) {
                *d = u.as_f64();
            }
            if dy.iter().all(|&v| v == 0.0) {
                continue;
            }
            for (b, &d) in db.iter_mut().zip(&dy) {
                *b += d;
            }
            for ki in 0..k {
                let row = (i * stride + ki) * w;
                for kj in 0..k {
                    let base = (row + j * stride + kj) * c;
                    for ch in 0..c {
                        let kb = ((ki * k + kj) * c + ch) * f;
                        let x = input[base + ch].as_f64();
                        let mut g = 0.0;
                        for ((dkv, &kv), &d) in
                            dk[kb..kb + f].iter_mut().zip(&kernel[kb..kb + f]).zip(&dy)
                        {
                            *dkv += x * d;
                            g += kv.as_f64() * d;
                        }
                        dx[base + ch] += g;
                    }
                }
            }
        }
    }
}

/// Indices (flat, into the pooled input) of each window maximum.
pub type ArgmaxIndices = Vec<usize>;

/// Per-channel max pooling of an `H×W×C` input.
///
/// Ties resolve to the lowest flat index in the window.
pub fn maxpool2d<T: Real>(
    input: &Tensor<T>,
    window: usize,
    stride: usize,
) -> Result<(Tensor<T>, ArgmaxIndices)> {
    expect_rank(input, 3, "maxpool2d")?;
    let [h, w, c] = [input.shape()[0], input.shape()[1], input.shape()[2]];
    if window == 0 || stride == 0 {
        return Err(Error::InvalidConfig(
            "pool window and stride must be positive".into(),
        ));
    }
    if window > h || window > w {
        return Err(Error::WindowTooLarge {
            window,
            height: h,
            width: w,
        });
    }
    let (oh, ow) = (window_out(h, window, stride), window_out(w, window, stride));
    let mut out = vec![T::zero(); oh * ow * c];
    let mut idx = vec![0usize; oh * ow * c];
    maxpool_slice(input.data(), [h, w, c], window, stride, &mut out, &mut idx);
    Ok((Tensor::new([oh, ow, c], out)?, idx))
}

pub(crate) fn maxpool_slice<T: Real>(
    input: &[T],
    [h, w, c]: [usize; 3],
    window: usize,
    stride: usize,
    out: &mut [T],
    argmax: &mut [usize],
) {
    let (oh, ow) = (window_out(h, window, stride), window_out(w, window, stride));
    for i in 0..oh {
        for j in 0..ow {
            for ch in 0..c {
                let mut best = usize::MAX;
                let mut best_v = T::zero();
                // Row-major window scan visits flat indices in increasing
                // order, so strict `>` keeps the first maximum.
                for wi in 0..window {
                    for wj in 0..window {
                        let src = ((i * stride + wi) * w + j * stride + wj) * c + ch;
                        let v = input[src];
                        if best == usize::MAX || v > best_v {
                            best = src;
                            best_v = v;
                        }
                    }
                }
                let o = (i * ow + j) * c + ch;
                out[o] = best_v;
                argmax[o] = best;
            }
        }
    }
}

/// Routes each upstream value to the input cell its window maximum came from.
pub fn maxpool2d_backward<T: Real>(
    upstream: &Tensor<T>,
    argmax: &[usize],
    input_shape: &[usize],
) -> Result<Tensor<T>> {
    if upstream.len() != argmax.len() {
        return Err(Error::ShapeMismatch {
            op: "maxpool2d_backward",
            left: upstream.shape().to_vec(),
            right: vec![argmax.len()],
        });
    }
    let mut grad = Tensor::zeros(input_shape.to_vec());
    let g = grad.data_mut();
    for (&src, &u) in argmax.iter().zip(upstream.data()) {
        g[src] += u;
    }
    Ok(grad)
}

/// Concatenates rank-1 tensors in argument order.
pub fn concat<T: Real>(parts: &[&Tensor<T>]) -> Result<Tensor<T>> {
    if parts.is_empty() {
        return Err(Error::EmptyConcat);
    }
    let mut data = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
    for p in parts {
        expect_rank(p, 1, "concat")?;
        data.extend_from_slice(p.data());
    }
    Ok(Tensor::vector(&data))
}

/// Row-wise concatenation of `[N, a]`, `[N, b]`, ... into `[N, a + b + ...]`.
pub fn concat_columns<T: Real>(parts: &[&Tensor<T>]) -> Result<Tensor<T>> {
    let first = parts.first().ok_or(Error::EmptyConcat)?;
    let n = first.rows();
    for p in parts {
        expect_rank(p, 2, "concat_columns")?;
        if p.rows() != n {
            return Err(Error::ShapeMismatch {
                op: "concat_columns",
                left: first.shape().to_vec(),
                right: p.shape().to_vec(),
            });
        }
    }
    let width: usize = parts.iter().map(|p| p.shape()[1]).sum();
    let mut data = Vec::with_capacity(n * width);
    for i in 0..n {
        for p in parts {
            data.extend_from_slice(p.row(i));
        }
    }
    Tensor::new([n, width], data)
}

/// Splits `[N, a + b + ...]` back into column blocks of the given widths.
pub fn split_columns<T: Real>(t: &Tensor<T>, widths: &[usize]) -> Result<Vec<Tensor<T>>> {
    expect_rank(t, 2, "split_columns")?;
    let total: usize = widths.iter().sum();
    if total != t.shape()[1] {
        return Err(Error::ShapeMismatch {
            op: "split_columns",
            left: t.shape().to_vec(),
            right: widths.to_vec(),
        });
    }
    let n = t.rows();
    let mut out: Vec<Vec<T>> = widths.iter().map(|w| Vec::with_capacity(n * w)).collect();
    for i in 0..n {
        let row = t.row(i);
        let mut off = 0;
        for (buf, &w) in out.iter_mut().zip(widths) {
            buf.extend_from_slice(&row[off..off + w]);
            off += w;
        }
    }
    out.into_iter()
        .zip(widths)
        .map(|(d, &w)| Tensor::new([n, w], d))
        .collect()
}

pub fn add<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    same_shape(a, b, "add")?;
    let d: Vec<T> = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| x + y)
        .collect();
    Tensor::new(a.shape().to_vec(), d)
}

pub fn mul<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    same_shape(a, b, "mul")?;
    let d: Vec<T> = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| x * y)
        .collect();
    Tensor::new(a.shape().to_vec(), d)
}

pub fn scale<T: Real>(a: &Tensor<T>, s: T) -> Tensor<T> {
    a.map(|v| v * s)
}

pub fn add_scalar<T: Real>(a: &Tensor<T>, s: T) -> Tensor<T> {
    a.map(|v| v + s)
}

/// Index of the maximum along the last axis, one per leading position.
/// Ties resolve to the lowest index.
pub fn argmax_last<T: Real>(a: &Tensor<T>) -> Vec<usize> {
    let w = a.shape().last().copied().unwrap_or(0);
    if w == 0 {
        return Vec::new();
    }
    a.data()
        .chunks(w)
        .map(|row| {
            let mut best = 0;
            for (i, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Sum of each row of a rank-2 tensor.
pub fn row_sum<T: Real>(a: &Tensor<T>) -> Result<Tensor<T>> {
    expect_rank(a, 2, "row_sum")?;
    let w = a.shape()[1];
    let d: Vec<T> = (0..a.rows())
        .map(|i| {
            T::from_f64(
                a.data()[i * w..(i + 1) * w]
                    .iter()
                    .map(|v| v.as_f64())
                    .sum(),
            )
        })
        .collect();
    Ok(Tensor::vector(&d))
}

/// Mean of each row of a rank-2 tensor.
pub fn row_mean<T: Real>(a: &Tensor<T>) -> Result<Tensor<T>> {
    let w = a.shape().get(1).copied().unwrap_or(0);
    if w == 0 {
        return Err(Error::InvalidShape {
            shape: a.shape().to_vec(),
            reason: "row_mean over empty rows".into(),
        });
    }
    let s = row_sum(a)?;
    Ok(scale(&s, T::from_f64(1.0 / w as f64)))
}
