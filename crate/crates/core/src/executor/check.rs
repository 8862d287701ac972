use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{block_forward, BlockConfig, BlockWeights};
use crate::compression::{
    bitmask_decode, bitmask_encode, inject_fault, prune_magnitude, quantize, DeficitPolicy,
    FaultTarget, Tensor2D,
};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceOptions {
    pub sparsity: f64,
    pub seq_len: usize,
    pub config: BlockConfig,
    /// Flip one random presence bit in one backbone matrix before decoding.
    pub bitmask_fault: bool,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        Self {
            sparsity: 0.5,
            seq_len: 8,
            config: BlockConfig::default(),
            bitmask_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub max_abs_deviation: f32,
    pub bit_identical: bool,
    /// (matrix index, bit position) of the injected fault.
    pub fault: Option<(usize, usize)>,
}

/// Runs the block on pruned dense weights and on the same weights after a
/// bitmask encode/decode round trip, and compares the outputs.
pub fn sparse_equivalence_check(
    w: &BlockWeights,
    seed: u64,
    opts: &EquivalenceOptions,
) -> Result<EquivalenceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fmt = opts.config.format;
    let dense = w.map_backbone(|t| Ok(quantize(&prune_magnitude(t, opts.sparsity)?, fmt)))?;

    let fault = if opts.bitmask_fault {
        let which = rng.gen_range(0..6);
        Some((
            which,
            rng.gen_range(0..dense.backbone()[which].weight.len()),
        ))
    } else {
        None
    };

    let mut idx = 0;
    let decoded = dense.map_backbone(|t| {
        let mut s = bitmask_encode(t);
        if let Some((which, pos)) = fault {
            if which == idx {
                s = inject_fault(&s, FaultTarget::Bitmask, pos, fmt)?.tensor;
            }
        }
        idx += 1;
        bitmask_decode(&s, DeficitPolicy::ZeroFill)
    })?;

    let x = Tensor2D::from_fn(opts.seq_len, w.hidden(), |_, _| rng.gen_range(-1.0f32..1.0));
    let a = block_forward(&x, &dense, &opts.config)?;
    let b = block_forward(&x, &decoded, &opts.config)?;
    Ok(EquivalenceReport {
        max_abs_deviation: a.max_abs_diff(&b)?,
        bit_identical: a.bit_eq(&b),
        fault,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::ValueFormat;

    #[test]
    fn round_trip_is_exact() {
        for seed in 0..5 {
            let w = BlockWeights::random(16, 32, 4, [4, 8], seed).unwrap();
            for fmt in ValueFormat::STUDY {
                let opts = EquivalenceOptions {
                    config: BlockConfig::with_format(fmt),
                    ..Default::default()
                };
                let r = sparse_equivalence_check(&w, seed, &opts).unwrap();
                assert!(r.bit_identical && r.max_abs_deviation == 0.0);
            }
        }
    }

    #[test]
    fn fully_pruned_weights_agree() {
        let w = BlockWeights::random(16, 32, 4, [4, 4], 2).unwrap();
        let opts = EquivalenceOptions {
            sparsity: 1.0,
            ..Default::default()
        };
        assert!(
            sparse_equivalence_check(&w, 2, &opts)
                .unwrap()
                .bit_identical
        );
    }

    #[test]
    fn bitmask_fault_is_visible() {
        let w = BlockWeights::random(16, 32, 4, [4, 4], 3).unwrap();
        let opts = EquivalenceOptions {
            bitmask_fault: true,
            ..Default::default()
        };
        let deviating = (0..10)
            .map(|seed| sparse_equivalence_check(&w, seed, &opts).unwrap())
            .filter(|r| r.max_abs_deviation > 0.0)
            .count();
        assert!(deviating > 0);
    }
}
