use proptest::prelude::*;

use hmsim_core::compression::{
    bitmask_decode, bitmask_encode, inject_fault, quantize, quantize_value, read_sparse,
    write_sparse, DeficitPolicy, FaultTarget, FixedPointFormat, Tensor2D, ValueFormat,
};
use hmsim_core::data::{ADAPTER_SCENARIO_JSON, DEFAULT_PROFILE_JSON, VANILLA_SCENARIO_JSON};
use hmsim_core::executor::{
    block_forward, sparse_equivalence_check, BlockConfig, BlockWeights, EquivalenceOptions,
};
use hmsim_core::memory::{
    footprint, provision, Accounting, FootprintInput, MemoryKind, Placement, TechLibrary,
};
use hmsim_core::model::{ModelSpec, TaskSpec};
use hmsim_core::perf::{run_scenario, ScenarioConfig};

fn arb_format() -> impl Strategy<Value = ValueFormat> {
    prop::sample::select(ValueFormat::STUDY.to_vec())
}

fn arb_sparse() -> impl Strategy<Value = Tensor2D> {
    (1usize..24, 1usize..24).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop_oneof![3 => Just(0.0f32), 2 => -8.0f32..8.0], r * c)
            .prop_map(move |d| Tensor2D::new(r, c, d).unwrap())
    })
}

/// Decodes by walking the mask bit by bit, LSB first within each byte.
fn naive_decode(rows: usize, cols: usize, mask: &[u8], values: &[f32]) -> Vec<f32> {
    let mut next = values.iter();
    (0..rows * cols)
        .map(|k| {
            if mask[k / 8] >> (k % 8) & 1 == 1 {
                next.next().copied().unwrap_or(0.0)
            } else {
                0.0
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn codec_round_trips(t in arb_sparse(), fmt in arb_format()) {
        let t = quantize(&t, fmt);
        let s = bitmask_encode(&t);
        prop_assert_eq!(s.bitmask().len(), t.len().div_ceil(8));
        prop_assert_eq!(s.values().len(), t.data().iter().filter(|x| x.to_bits() != 0).count());
        prop_assert!(bitmask_decode(&s, DeficitPolicy::Error).unwrap().bit_eq(&t));
        let naive = naive_decode(t.rows(), t.cols(), s.bitmask(), s.values());
        prop_assert!(naive.iter().zip(t.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
        let bytes = write_sparse(&s, fmt).unwrap();
        prop_assert_eq!(read_sparse(&bytes, fmt).unwrap(), s);
    }

    #[test]
    fn quantizer_is_a_rounding_projection(x in prop::num::f32::NORMAL | prop::num::f32::ZERO, wide in any::<bool>()) {
        let q = if wide { FixedPointFormat::Q3_13 } else { FixedPointFormat::Q3_5 };
        let y = quantize_value(x, q);
        let (lo, hi) = (q.min_value(), q.max_value());
        prop_assert!((lo..=hi).contains(&(y as f64)));
        prop_assert_eq!((y as f64 / q.step()).fract(), 0.0);
        prop_assert_eq!(quantize_value(y, q).to_bits(), y.to_bits());
        let clamped = (x as f64).clamp(lo, hi);
        prop_assert!((y as f64 - clamped).abs() <= q.step() / 2.0);
    }

    #[test]
    fn quantizer_is_monotone(a in -6.0f32..6.0, b in -6.0f32..6.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for q in [FixedPointFormat::Q3_13, FixedPointFormat::Q3_5] {
            prop_assert!(quantize_value(lo, q) <= quantize_value(hi, q));
        }
    }

    #[test]
    fn fault_corruption_matches_naive_decode(t in arb_sparse(), fmt in arb_format(), pick in any::<prop::sample::Index>()) {
        let t = quantize(&t, fmt);
        let s = bitmask_encode(&t);
        let pos = pick.index(s.len());
        let hit = inject_fault(&s, FaultTarget::Bitmask, pos, fmt).unwrap();
        let mut mask = s.bitmask().to_vec();
        mask[pos / 8] ^= 1 << (pos % 8);
        let dirty = naive_decode(t.rows(), t.cols(), &mask, s.values());
        let clean = naive_decode(t.rows(), t.cols(), s.bitmask(), s.values());
        let want = dirty.iter().zip(&clean).filter(|(a, b)| a.to_bits() != b.to_bits()).count();
        prop_assert_eq!(hit.corruption, want);

        if !s.values().is_empty() {
            let vpos = pick.index(s.values().len() * fmt.bits() as usize);
            prop_assert_eq!(inject_fault(&s, FaultTarget::Values, vpos, fmt).unwrap().corruption, 1);
        }
    }

    #[test]
    fn footprint_scales_with_value_width(
        s_embd in 0.0f64..1.0,
        s_tf in 0.0f64..1.0,
        sizes in prop::collection::vec((1u64..6, 0u64..300, 0u64..300), 1..5),
        vanilla in any::<bool>(),
        full in any::<bool>(),
    ) {
        let tasks: Vec<TaskSpec> = sizes
            .iter()
            .enumerate()
            .map(|(i, (l, a, b))| TaskSpec::new(format!("t{i}"), *l, [*a, *b]))
            .collect();
        let input = |format| FootprintInput {
            model: ModelSpec::default(),
            tasks: tasks.clone(),
            s_embd,
            s_tf,
            format,
            placement: if vanilla { Placement::VanillaAlbert } else { Placement::AdapterAlbert },
            accounting: if full { Accounting::Full } else { Accounting::PaperParity },
            mlc_bits_per_cell: 2,
        };
        let fp = footprint(&input(ValueFormat::Fp32)).unwrap();
        let q13 = footprint(&input(ValueFormat::Q3_13)).unwrap();
        let q5 = footprint(&input(ValueFormat::Q3_5)).unwrap();
        prop_assert_eq!(q13.mlc_bits * 2, fp.mlc_bits);
        prop_assert_eq!(q5.mlc_bits * 4, fp.mlc_bits);
        prop_assert_eq!(q5.slc_bits, fp.slc_bits);
        if !full {
            prop_assert_eq!(q13.sram_bits * 2, fp.sram_bits);
            prop_assert_eq!(q5.sram_bits * 4, fp.sram_bits);
        } else {
            prop_assert!(q5.sram_bits < q13.sram_bits && q13.sram_bits < fp.sram_bits);
        }

        let lib = TechLibrary::from_json(DEFAULT_PROFILE_JSON).unwrap();
        let (sram, slc, mlc) = fp.provisioned_bytes();
        for (need, kind) in [(sram, MemoryKind::Sram), (slc, MemoryKind::SlcRram), (mlc, MemoryKind::MlcRram)] {
            let entry = provision(need, lib.get(kind).unwrap()).unwrap();
            prop_assert!(entry.total_capacity_bytes() >= need);
        }
    }

    #[test]
    fn longer_visits_amortize_switching(k in 1u64..200, vanilla in any::<bool>(), fmt in arb_format()) {
        let lib = TechLibrary::from_json(DEFAULT_PROFILE_JSON).unwrap();
        let mut s = ScenarioConfig::from_json(if vanilla { VANILLA_SCENARIO_JSON } else { ADAPTER_SCENARIO_JSON }).unwrap();
        s.format = fmt;
        s.schedule.iter_mut().for_each(|v| v.inferences = k);
        let short = run_scenario(&s, &lib).unwrap();
        s.schedule.iter_mut().for_each(|v| v.inferences = k + 1);
        let long = run_scenario(&s, &lib).unwrap();
        prop_assert!(long.energy_per_inference_pj < short.energy_per_inference_pj);
        prop_assert!(long.latency_per_inference_ns < short.latency_per_inference_ns);
        prop_assert_eq!(long.area_mm2, short.area_mm2);
        prop_assert_eq!(long.switch_count, 3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decoded_weights_run_identically(
        seed in any::<u64>(),
        heads in prop::sample::select(vec![1usize, 2, 4]),
        sizes in (0usize..6, 0usize..6),
        sparsity in 0.0f64..=1.0,
        seq_len in 1usize..10,
        fmt in arb_format(),
    ) {
        let w = BlockWeights::random(8, 16, heads, [sizes.0, sizes.1], seed).unwrap();
        let opts = EquivalenceOptions { sparsity, seq_len, config: BlockConfig::with_format(fmt), bitmask_fault: false };
        prop_assert!(sparse_equivalence_check(&w, seed, &opts).unwrap().bit_identical);
    }

    #[test]
    fn zeroed_adapters_are_transparent(seed in any::<u64>(), sizes in (1usize..6, 1usize..6), fmt in arb_format()) {
        let mut w = BlockWeights::random(8, 16, 2, [sizes.0, sizes.1], seed).unwrap();
        w.zero_adapter_outputs();
        let mut bare = w.clone();
        bare.attn_adapter = None;
        bare.ffn_adapter = None;
        let x = Tensor2D::from_fn(3, 8, |i, j| ((seed as usize + 7 * i + j) % 13) as f32 / 6.5 - 1.0);
        let cfg = BlockConfig::with_format(fmt);
        prop_assert!(block_forward(&x, &w, &cfg).unwrap().bit_eq(&block_forward(&x, &bare, &cfg).unwrap()));
    }
}
