use serde::{Deserialize, Serialize};

use super::{AdapterWeights, BlockWeights, LayerNormParams, Linear};
use crate::compression::{quantize, Tensor2D, ValueFormat};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Relu,
    /// tanh approximation.
    #[default]
    Gelu,
    Identity,
}

impl Activation {
    pub fn apply(&self, x: f32) -> f32 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Gelu => {
                let x = x as f64;
                let c = (2.0 / std::f64::consts::PI).sqrt();
                (0.5 * x * (1.0 + (c * (x + 0.044715 * x.powi(3))).tanh())) as f32
            }
            Activation::Identity => x,
        }
    }
}

/// Where each adapter sits relative to its residual layer-norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormOrder {
    /// `LN(x + adapter(sublayer(x)))`
    #[default]
    AdapterThenNorm,
    /// `adapter(LN(x + sublayer(x)))`
    NormThenAdapter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub format: ValueFormat,
    pub ffn_activation: Activation,
    pub adapter_activation: Activation,
    pub norm_order: NormOrder,
    pub ln_eps: f64,
}

impl Default for BlockConfig {
    fn default() -> Self {
        Self {
            format: ValueFormat::Fp32,
            ffn_activation: Activation::Gelu,
            adapter_activation: Activation::Gelu,
            norm_order: NormOrder::AdapterThenNorm,
            ln_eps: 1e-12,
        }
    }
}

impl BlockConfig {
    pub fn with_format(format: ValueFormat) -> Self {
        Self {
            format,
            ..Self::default()
        }
    }
}

/// `x W + b`, accumulated in f64 and rounded once.
pub fn linear(x: &Tensor2D, l: &Linear) -> Result<Tensor2D> {
    if x.cols() != l.n_in() {
        return Err(Error::ShapeMismatch(format!(
            "input has {} columns, layer expects {}",
            x.cols(),
            l.n_in()
        )));
    }
    let (n, k, m) = (x.rows(), l.n_in(), l.n_out());
    let w = l.weight.data();
    let mut out = Vec::with_capacity(n * m);
    let mut acc = vec![0f64; m];
    for r in 0..n {
        for (j, a) in acc.iter_mut().enumerate() {
            *a = l.bias[j] as f64;
        }
        for (i, &xv) in x.row(r).iter().enumerate().take(k) {
            let xv = xv as f64;
            for (a, &wv) in acc.iter_mut().zip(&w[i * m..(i + 1) * m]) {
                *a += xv * wv as f64;
            }
        }
        out.extend(acc.iter().map(|&a| a as f32));
    }
    Tensor2D::new(n, m, out)
}

fn add(a: &Tensor2D, b: &Tensor2D) -> Result<Tensor2D> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::ShapeMismatch(format!(
            "cannot add {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect();
    Tensor2D::new(a.rows(), a.cols(), data)
}

/// Row-wise normalization followed by scale and shift.
pub fn layer_norm(x: &Tensor2D, p: &LayerNormParams, eps: f64) -> Result<Tensor2D> {
    let w = x.cols();
    if p.gamma.len() != w || p.beta.len() != w {
        return Err(Error::ShapeMismatch(format!(
            "layer-norm width {} != {w}",
            p.gamma.len()
        )));
    }
    let mut out = Vec::with_capacity(x.len());
    for r in 0..x.rows() {
        let row = x.row(r);
        let mean = row.iter().map(|&v| v as f64).sum::<f64>() / w as f64;
        let var = row.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / w as f64;
        let inv = 1.0 / (var + eps).sqrt();
        out.extend(row.iter().enumerate().map(|(j, &v)| {
            ((v as f64 - mean) * inv * p.gamma[j] as f64 + p.beta[j] as f64) as f32
        }));
    }
    Tensor2D::new(x.rows(), w, out)
}

/// `x + up(act(down(x)))`.
pub fn adapter_forward(x: &Tensor2D, w: &AdapterWeights, act: Activation) -> Result<Tensor2D> {
    adapter_forward_q(x, w, act, ValueFormat::Fp32)
}

fn adapter_forward_q(
    x: &Tensor2D,
    w: &AdapterWeights,
    act: Activation,
    fmt: ValueFormat,
) -> Result<Tensor2D> {
    if x.cols() != w.hidden() {
        return Err(Error::ShapeMismatch(format!(
            "adapter expects {} columns, input has {}",
            w.hidden(),
            x.cols()
        )));
    }
    let down = quantize(&linear(x, &w.down)?, fmt).map(|v| act.apply(v));
    let up = quantize(&linear(&quantize(&down, fmt), &w.up)?, fmt);
    Ok(quantize(&add(x, &up)?, fmt))
}

fn softmax_rows(x: &mut [f64], width: usize) {
    for row in x.chunks_mut(width) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// Multi-head self-attention without masking.
pub fn attention(x: &Tensor2D, w: &BlockWeights, fmt: ValueFormat) -> Result<Tensor2D> {
    let q = quantize(&linear(x, &w.query)?, fmt);
    let k = quantize(&linear(x, &w.key)?, fmt);
    let v = quantize(&linear(x, &w.value)?, fmt);
    let (n, h) = (x.rows(), w.hidden());
    let dh = h / w.num_heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut ctx = Tensor2D::zeros(n, h);
    for head in 0..w.num_heads {
        let off = head * dh;
        let mut scores = vec![0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..dh)
                    .map(|d| q.get(i, off + d) as f64 * k.get(j, off + d) as f64)
                    .sum();
                scores[i * n + j] = dot * scale;
            }
        }
        let mut scores = quantize(
            &Tensor2D::new(n, n, scores.iter().map(|&s| s as f32).collect())?,
            fmt,
        )
        .into_data()
        .into_iter()
        .map(|s| s as f64)
        .collect::<Vec<_>>();
        softmax_rows(&mut scores, n);
        let probs = quantize(
            &Tensor2D::new(n, n, scores.iter().map(|&p| p as f32).collect())?,
            fmt,
        );
        let data = ctx.data_mut();
        for i in 0..n {
            for d in 0..dh {
                let acc: f64 = (0..n)
                    .map(|j| probs.get(i, j) as f64 * v.get(j, off + d) as f64)
                    .sum();
                data[i * h + off + d] = acc as f32;
            }
        }
    }
    Ok(quantize(&linear(&quantize(&ctx, fmt), &w.output)?, fmt))
}

fn residual_block(
    x: &Tensor2D,
    sub: &Tensor2D,
    adapter: Option<&AdapterWeights>,
    norm: &LayerNormParams,
    cfg: &BlockConfig,
) -> Result<Tensor2D> {
    let fmt = cfg.format;
    let adapt = |t: &Tensor2D| match adapter {
        Some(a) => adapter_forward_q(t, a, cfg.adapter_activation, fmt),
        None => Ok(t.clone()),
    };
    match cfg.norm_order {
        NormOrder::AdapterThenNorm => {
            let a = adapt(sub)?;
            Ok(quantize(&layer_norm(&add(x, &a)?, norm, cfg.ln_eps)?, fmt))
        }
        NormOrder::NormThenAdapter => {
            let n = quantize(&layer_norm(&add(x, sub)?, norm, cfg.ln_eps)?, fmt);
            adapt(&n)
        }
    }
}

/// Attention, adapter, layer-norm, feed-forward, adapter, layer-norm.
/// Under a fixed-point format every intermediate is re-quantized after the
/// operation that produced it.
pub fn block_forward(x: &Tensor2D, w: &BlockWeights, cfg: &BlockConfig) -> Result<Tensor2D> {
    w.validate()?;
    if x.cols() != w.hidden() {
        return Err(Error::ShapeMismatch(format!(
            "block expects {} columns, input has {}",
            w.hidden(),
            x.cols()
        )));
    }
    let fmt = cfg.format;
    let x = quantize(x, fmt);
    let attn = attention(&x, w, fmt)?;
    let h1 = residual_block(&x, &attn, w.attn_adapter.as_ref(), &w.attn_norm, cfg)?;
    let inner = quantize(&linear(&h1, &w.ffn_in)?, fmt).map(|v| cfg.ffn_activation.apply(v));
    let ffn = quantize(&linear(&quantize(&inner, fmt), &w.ffn_out)?, fmt);
    residual_block(&h1, &ffn, w.ffn_adapter.as_ref(), &w.ffn_norm, cfg)
}
