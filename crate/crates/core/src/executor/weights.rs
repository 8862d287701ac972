use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compression::Tensor2D;
use crate::error::{Error, Result};

/// `y = x W + b` with `W` stored `in x out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub weight: Tensor2D,
    pub bias: Vec<f32>,
}

impl Linear {
    pub fn new(weight: Tensor2D, bias: Vec<f32>) -> Result<Self> {
        if bias.len() != weight.cols() {
            return Err(Error::ShapeMismatch(format!(
                "bias of length {} for a {}x{} weight",
                bias.len(),
                weight.rows(),
                weight.cols()
            )));
        }
        Ok(Self { weight, bias })
    }

    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            weight: Tensor2D::zeros(n_in, n_out),
            bias: vec![0.0; n_out],
        }
    }

    /// Uniform in `[-1/sqrt(n_in), 1/sqrt(n_in)]`.
    pub fn random(n_in: usize, n_out: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (n_in.max(1) as f32).sqrt();
        Self {
            weight: Tensor2D::from_fn(n_in, n_out, |_, _| rng.gen_range(-bound..=bound)),
            bias: (0..n_out)
                .map(|_| rng.gen_range(-bound..=bound) * 0.1)
                .collect(),
        }
    }

    pub fn n_in(&self) -> usize {
        self.weight.rows()
    }

    pub fn n_out(&self) -> usize {
        self.weight.cols()
    }

    fn check(&self, name: &str, n_in: usize, n_out: usize) -> Result<()> {
        if self.n_in() != n_in || self.n_out() != n_out || self.bias.len() != n_out {
            return Err(Error::ShapeMismatch(format!(
                "{name}: expected {n_in}x{n_out}, found {}x{} with bias {}",
                self.n_in(),
                self.n_out(),
                self.bias.len()
            )));
        }
        Ok(())
    }
}

/// Bottleneck adapter: `hidden -> s -> hidden`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterWeights {
    pub down: Linear,
    pub up: Linear,
}

impl AdapterWeights {
    pub fn random(hidden: usize, size: usize, rng: &mut impl Rng) -> Self {
        Self {
            down: Linear::random(hidden, size, rng),
            up: Linear::random(size, hidden, rng),
        }
    }

    pub fn size(&self) -> usize {
        self.down.n_out()
    }

    pub fn hidden(&self) -> usize {
        self.down.n_in()
    }

    pub fn validate(&self) -> Result<()> {
        let (h, s) = (self.hidden(), self.size());
        self.down.check("adapter.down", h, s)?;
        self.up.check("adapter.up", s, h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerNormParams {
    pub gamma: Vec<f32>,
    pub beta: Vec<f32>,
}

impl LayerNormParams {
    pub fn identity(width: usize) -> Self {
        Self {
            gamma: vec![1.0; width],
            beta: vec![0.0; width],
        }
    }
}

/// One transformer block with an adapter after each sublayer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockWeights {
    pub num_heads: usize,
    pub query: Linear,
    pub key: Linear,
    pub value: Linear,
    pub output: Linear,
    pub ffn_in: Linear,
    pub ffn_out: Linear,
    pub attn_norm: LayerNormParams,
    pub ffn_norm: LayerNormParams,
    pub attn_adapter: Option<AdapterWeights>,
    pub ffn_adapter: Option<AdapterWeights>,
}

impl BlockWeights {
    /// Seeded random block. An adapter size of 0 leaves that slot empty.
    pub fn random(
        hidden: usize,
        ffn: usize,
        num_heads: usize,
        adapter_sizes: [usize; 2],
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rng = &mut rng;
        let adapter = |s: usize, rng: &mut ChaCha8Rng| {
            (s > 0).then(|| AdapterWeights::random(hidden, s, rng))
        };
        let w = Self {
            num_heads,
            query: Linear::random(hidden, hidden, rng),
            key: Linear::random(hidden, hidden, rng),
            value: Linear::random(hidden, hidden, rng),
            output: Linear::random(hidden, hidden, rng),
            ffn_in: Linear::random(hidden, ffn, rng),
            ffn_out: Linear::random(ffn, hidden, rng),
            attn_norm: LayerNormParams::identity(hidden),
            ffn_norm: LayerNormParams::identity(hidden),
            attn_adapter: adapter(adapter_sizes[0], rng),
            ffn_adapter: adapter(adapter_sizes[1], rng),
        };
        w.validate()?;
        Ok(w)
    }

    pub fn hidden(&self) -> usize {
        self.query.n_in()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden();
        let f = self.ffn_in.n_out();
        if self.num_heads == 0 || !h.is_multiple_of(self.num_heads) {
            return Err(Error::ShapeMismatch(format!(
                "hidden width {h} is not divisible into {} heads",
                self.num_heads
            )));
        }
        self.query.check("query", h, h)?;
        self.key.check("key", h, h)?;
        self.value.check("value", h, h)?;
        self.output.check("output", h, h)?;
        self.ffn_in.check("ffn_in", h, f)?;
        self.ffn_out.check("ffn_out", f, h)?;
        for (name, n) in [("attn_norm", &self.attn_norm), ("ffn_norm", &self.ffn_norm)] {
            if n.gamma.len() != h || n.beta.len() != h {
                return Err(Error::ShapeMismatch(format!("{name}: expected width {h}")));
            }
        }
        for a in [&self.attn_adapter, &self.ffn_adapter]
            .into_iter()
            .flatten()
        {
            a.validate()?;
            if a.hidden() != h {
                return Err(Error::ShapeMismatch(format!(
                    "adapter width {} != {h}",
                    a.hidden()
                )));
            }
        }
        Ok(())
    }

    /// Applies `f` to each fixed (task-shared) weight matrix.
    pub fn map_backbone(&self, mut f: impl FnMut(&Tensor2D) -> Result<Tensor2D>) -> Result<Self> {
        let mut out = self.clone();
        for l in out.backbone_mut() {
            l.weight = f(&l.weight)?;
        }
        Ok(out)
    }

    pub fn backbone(&self) -> [&Linear; 6] {
        [
            &self.query,
            &self.key,
            &self.value,
            &self.output,
            &self.ffn_in,
            &self.ffn_out,
        ]
    }

    pub fn backbone_mut(&mut self) -> [&mut Linear; 6] {
        [
            &mut self.query,
            &mut self.key,
            &mut self.value,
            &mut self.output,
            &mut self.ffn_in,
            &mut self.ffn_out,
        ]
    }

    /// Clears the up-projection of both adapters.
    pub fn zero_adapter_outputs(&mut self) {
        for a in [&mut self.attn_adapter, &mut self.ffn_adapter]
            .into_iter()
            .flatten()
        {
            let (s, h) = (a.up.n_in(), a.up.n_out());
            a.up = Linear::zeros(s, h);
        }
    }
}
