use serde::{Deserialize, Serialize};

use super::{bitmask_decode, DeficitPolicy, SparseTensor, ValueFormat};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultTarget {
    Bitmask,
    Values,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectedFault {
    pub tensor: SparseTensor,
    /// Element positions whose decoded value changed.
    pub corruption: usize,
}

/// Flips one stored bit of `s` and counts the decoded elements it corrupts.
///
/// Bitmask positions index the `rows * cols` presence bits. Value positions
/// index the packed value stream at the width of `fmt`, bit 0 being the
/// least significant bit of the first value. Both decodes use zero-fill, and
/// elements are compared by bit pattern.
pub fn inject_fault(
    s: &SparseTensor,
    target: FaultTarget,
    position: usize,
    fmt: ValueFormat,
) -> Result<InjectedFault> {
    let clean = bitmask_decode(s, DeficitPolicy::ZeroFill)?;
    let mut hit = s.clone();
    match target {
        FaultTarget::Bitmask => {
            if position >= s.len() {
                return Err(Error::OutOfRange {
                    what: "bitmask position",
                    value: position as f64,
                    min: 0.0,
                    max: s.len().saturating_sub(1) as f64,
                });
            }
            hit.flip_bit(position);
        }
        FaultTarget::Values => {
            let width = fmt.bits() as usize;
            let total = s.values().len() * width;
            if position >= total {
                return Err(Error::OutOfRange {
                    what: "value bit position",
                    value: position as f64,
                    min: 0.0,
                    max: total.saturating_sub(1) as f64,
                });
            }
            let (idx, bit) = (position / width, position % width);
            let v = &mut hit.values_mut()[idx];
            *v = match fmt {
                ValueFormat::Fp32 => f32::from_bits(v.to_bits() ^ (1 << bit)),
                ValueFormat::Fixed(q) => {
                    let code = q.exact_code(*v).ok_or(Error::NotRepresentable {
                        value: *v,
                        format: fmt.to_string(),
                    })?;
                    // flip within the two's complement field, then sign-extend
                    let mask = (1i64 << width) - 1;
                    let raw = (code & mask) ^ (1 << bit);
                    let signed = if raw >> (width - 1) & 1 == 1 {
                        raw - (1 << width)
                    } else {
                        raw
                    };
                    q.decode(signed)
                }
            };
        }
    }
    let dirty = bitmask_decode(&hit, DeficitPolicy::ZeroFill)?;
    let corruption = clean
        .data()
        .iter()
        .zip(dirty.data())
        .filter(|(a, b)| a.to_bits() != b.to_bits())
        .count();
    Ok(InjectedFault {
        tensor: hit,
        corruption,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::{bitmask_encode, quantize, Tensor2D};

    fn a_b() -> SparseTensor {
        // mask 1010, values [a, b]
        SparseTensor::from_parts(1, 4, vec![0b0101], vec![3.0, 7.0]).unwrap()
    }

    #[test]
    fn insertion_shifts_values() {
        let f = inject_fault(&a_b(), FaultTarget::Bitmask, 1, ValueFormat::Fp32).unwrap();
        assert_eq!(f.tensor.mask_string(), "1110");
        let decoded = bitmask_decode(&f.tensor, DeficitPolicy::ZeroFill).unwrap();
        assert_eq!(decoded.data(), &[3.0, 7.0, 0.0, 0.0]);
        assert_eq!(f.corruption, 2);
    }

    #[test]
    fn deletion_at_tail() {
        let f = inject_fault(&a_b(), FaultTarget::Bitmask, 2, ValueFormat::Fp32).unwrap();
        assert_eq!(f.corruption, 1);
    }

    #[test]
    fn deletion_at_head_shifts_everything() {
        let f = inject_fault(&a_b(), FaultTarget::Bitmask, 0, ValueFormat::Fp32).unwrap();
        // [a, 0, b, 0] -> [0, 0, a, 0]
        assert_eq!(f.corruption, 2);
    }

    #[test]
    fn value_flip_hits_one_weight() {
        for pos in 0..64 {
            let f = inject_fault(&a_b(), FaultTarget::Values, pos, ValueFormat::Fp32).unwrap();
            assert_eq!(f.corruption, 1, "bit {pos}");
        }
        let t = quantize(
            &Tensor2D::new(1, 3, vec![0.5, 0.0, -1.25]).unwrap(),
            ValueFormat::Q3_5,
        );
        let s = bitmask_encode(&t);
        for pos in 0..16 {
            let f = inject_fault(&s, FaultTarget::Values, pos, ValueFormat::Q3_5).unwrap();
            assert_eq!(f.corruption, 1, "bit {pos}");
        }
    }

    #[test]
    fn positions_bounded() {
        assert!(inject_fault(&a_b(), FaultTarget::Bitmask, 4, ValueFormat::Fp32).is_err());
        assert!(inject_fault(&a_b(), FaultTarget::Values, 64, ValueFormat::Fp32).is_err());
        assert!(inject_fault(&a_b(), FaultTarget::Values, 16, ValueFormat::Q3_5).is_err());
    }
}
