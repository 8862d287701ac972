//! Bitmask sparse encoding.
//!
//! A matrix is stored as a presence bitmask over its row-major elements plus
//! the ordered vector of stored values. Bit `k` lives in byte `k / 8` at bit
//! position `k % 8` (LSB first).
//!
//! Binary layout (all integers little-endian):
//!
//! | offset | size            | field                                   |
//! |--------|-----------------|-----------------------------------------|
//! | 0      | 4               | rows (`u32`)                            |
//! | 4      | 4               | cols (`u32`)                            |
//! | 8      | 4               | value width in bits (`u32`: 8, 16, 32)  |
//! | 12     | ceil(rows*cols/8) | bitmask, zero padded to a byte        |
//! | ...    | n * width / 8   | values                                  |
//!
//! Width 32 stores raw `f32` bit patterns. Widths 8 and 16 store two's
//! complement fixed-point codes, so the reader must be told the fraction
//! bit count. The number of stored values is implied by the remaining file
//! length, which lets corrupted files (popcount != values) round-trip too.

use serde::{Deserialize, Serialize};

use super::{FixedPointFormat, Tensor2D, ValueFormat};
use crate::error::{Error, Result};

pub const SPARSE_HEADER_BYTES: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseTensor {
    rows: usize,
    cols: usize,
    bitmask: Vec<u8>,
    values: Vec<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeficitPolicy {
    /// Fail when the bitmask announces more values than are stored.
    #[default]
    Error,
    /// Missing values decode as zero; used when studying corrupted masks.
    ZeroFill,
}

fn mask_len(n: usize) -> usize {
    n.div_ceil(8)
}

impl SparseTensor {
    pub fn from_parts(
        rows: usize,
        cols: usize,
        bitmask: Vec<u8>,
        values: Vec<f32>,
    ) -> Result<Self> {
        if bitmask.len() != mask_len(rows * cols) {
            return Err(Error::Codec(format!(
                "bitmask of {} bytes for {rows}x{cols} elements",
                bitmask.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            bitmask,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bitmask(&self) -> &[u8] {
        &self.bitmask
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn bit(&self, k: usize) -> bool {
        self.bitmask[k / 8] >> (k % 8) & 1 == 1
    }

    pub(crate) fn flip_bit(&mut self, k: usize) {
        self.bitmask[k / 8] ^= 1 << (k % 8);
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    /// Set bits among the `rows * cols` element positions.
    pub fn popcount(&self) -> usize {
        (0..self.len()).filter(|&k| self.bit(k)).count()
    }

    /// Bitmask string, element 0 first (e.g. `"1010"`).
    pub fn mask_string(&self) -> String {
        (0..self.len())
            .map(|k| if self.bit(k) { '1' } else { '0' })
            .collect()
    }
}

/// Encodes every element whose bit pattern is not `+0.0`. Treating `-0.0`
/// as stored keeps decode(encode(t)) bit-exact.
pub fn bitmask_encode(t: &Tensor2D) -> SparseTensor {
    let n = t.len();
    let mut bitmask = vec![0u8; mask_len(n)];
    let mut values = Vec::new();
    for (k, &x) in t.data().iter().enumerate() {
        if x.to_bits() != 0 {
            bitmask[k / 8] |= 1 << (k % 8);
            values.push(x);
        }
    }
    SparseTensor {
        rows: t.rows(),
        cols: t.cols(),
        bitmask,
        values,
    }
}

pub fn bitmask_decode(s: &SparseTensor, policy: DeficitPolicy) -> Result<Tensor2D> {
    let set = s.popcount();
    if set > s.values.len() && policy == DeficitPolicy::Error {
        return Err(Error::ValueDeficit {
            set_bits: set,
            values: s.values.len(),
        });
    }
    let mut next = s.values.iter();
    let data = (0..s.len())
        .map(|k| {
            if s.bit(k) {
                next.next().copied().unwrap_or(0.0)
            } else {
                0.0
            }
        })
        .collect();
    Tensor2D::new(s.rows, s.cols, data)
}

fn fixed_of(fmt: ValueFormat) -> Result<Option<FixedPointFormat>> {
    match fmt {
        ValueFormat::Fp32 => Ok(None),
        ValueFormat::Fixed(q) if matches!(q.width(), 8 | 16) => Ok(Some(q)),
        ValueFormat::Fixed(q) => Err(Error::Codec(format!(
            "value width {} is not storable (8, 16 or 32)",
            q.width()
        ))),
    }
}

/// Serializes `s` with values stored in `fmt`. Fixed-point formats require
/// every stored value to already lie on the format grid.
pub fn write_sparse(s: &SparseTensor, fmt: ValueFormat) -> Result<Vec<u8>> {
    let fixed = fixed_of(fmt)?;
    let dim = |v: usize, what: &str| {
        u32::try_from(v).map_err(|_| Error::Codec(format!("{what} {v} exceeds u32")))
    };
    let mut out = Vec::with_capacity(SPARSE_HEADER_BYTES + s.bitmask.len() + s.values.len() * 4);
    out.extend_from_slice(&dim(s.rows, "rows")?.to_le_bytes());
    out.extend_from_slice(&dim(s.cols, "cols")?.to_le_bytes());
    out.extend_from_slice(&fmt.bits().to_le_bytes());
    out.extend_from_slice(&s.bitmask);
    for &v in &s.values {
        match fixed {
            None => out.extend_from_slice(&v.to_bits().to_le_bytes()),
            Some(q) => {
                let code = q.exact_code(v).ok_or(Error::NotRepresentable {
                    value: v,
                    format: fmt.to_string(),
                })?;
                if q.width() == 8 {
                    out.push(code as i8 as u8);
                } else {
                    out.extend_from_slice(&(code as i16).to_le_bytes());
                }
            }
        }
    }
    Ok(out)
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

/// Parses the binary layout written by [`write_sparse`]. The header's value
/// width must match `fmt`.
pub fn read_sparse(bytes: &[u8], fmt: ValueFormat) -> Result<SparseTensor> {
    if bytes.len() < SPARSE_HEADER_BYTES {
        return Err(Error::Codec("truncated header".into()));
    }
    let rows = read_u32(bytes, 0) as usize;
    let cols = read_u32(bytes, 4) as usize;
    let width = read_u32(bytes, 8);
    if width != fmt.bits() {
        return Err(Error::Codec(format!(
            "file stores {width}-bit values but {fmt} was requested"
        )));
    }
    let fixed = fixed_of(fmt)?;
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Codec("element count overflows".into()))?;
    let mask_end = SPARSE_HEADER_BYTES + mask_len(n);
    if bytes.len() < mask_end {
        return Err(Error::Codec("truncated bitmask".into()));
    }
    let bitmask = bytes[SPARSE_HEADER_BYTES..mask_end].to_vec();
    let payload = &bytes[mask_end..];
    let stride = width as usize / 8;
    if !payload.len().is_multiple_of(stride) {
        return Err(Error::Codec(format!(
            "{} value bytes is not a multiple of {stride}",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(stride)
        .map(|c| match (fixed, stride) {
            (None, _) => f32::from_bits(u32::from_le_bytes(c.try_into().expect("4 bytes"))),
            (Some(q), 1) => q.decode(c[0] as i8 as i64),
            (Some(q), _) => q.decode(i16::from_le_bytes(c.try_into().expect("2 bytes")) as i64),
        })
        .collect();
    SparseTensor::from_parts(rows, cols, bitmask, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::quantize;

    #[test]
    fn single_nonzero() {
        let t = Tensor2D::new(2, 2, vec![0.0, 1.5, 0.0, 0.0]).unwrap();
        let s = bitmask_encode(&t);
        assert_eq!(s.mask_string(), "0100");
        assert_eq!(s.bitmask(), &[0b0000_0010]);
        assert_eq!(s.values(), &[1.5]);
    }

    #[test]
    fn all_zero() {
        let s = bitmask_encode(&Tensor2D::zeros(2, 2));
        assert_eq!(s.mask_string(), "0000");
        assert!(s.values().is_empty());
        assert!(bitmask_decode(&s, DeficitPolicy::Error)
            .unwrap()
            .bit_eq(&Tensor2D::zeros(2, 2)));
    }

    #[test]
    fn direct_expansion() {
        let s = SparseTensor::from_parts(1, 4, vec![0b0101], vec![3.0, 7.0]).unwrap();
        assert_eq!(s.mask_string(), "1010");
        let t = bitmask_decode(&s, DeficitPolicy::Error).unwrap();
        assert_eq!(t.data(), &[3.0, 0.0, 7.0, 0.0]);
    }

    #[test]
    fn deficit_policies() {
        let s = SparseTensor::from_parts(1, 4, vec![0b0111], vec![3.0, 7.0]).unwrap();
        assert!(matches!(
            bitmask_decode(&s, DeficitPolicy::Error),
            Err(Error::ValueDeficit {
                set_bits: 3,
                values: 2
            })
        ));
        let t = bitmask_decode(&s, DeficitPolicy::ZeroFill).unwrap();
        assert_eq!(t.data(), &[3.0, 7.0, 0.0, 0.0]);
    }

    #[test]
    fn negative_zero_survives() {
        let t = Tensor2D::new(1, 3, vec![-0.0, 0.0, 2.0]).unwrap();
        let back = bitmask_decode(&bitmask_encode(&t), DeficitPolicy::Error).unwrap();
        assert!(back.bit_eq(&t));
    }

    #[test]
    fn file_layout() {
        let t = Tensor2D::new(
            1,
            10,
            vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -2.0],
        )
        .unwrap();
        let bytes = write_sparse(&bitmask_encode(&t), ValueFormat::Fp32).unwrap();
        let mut expected = vec![1, 0, 0, 0, 10, 0, 0, 0, 32, 0, 0, 0, 0b10, 0b10];
        expected.extend_from_slice(&1.0f32.to_le_bytes());
        expected.extend_from_slice(&(-2.0f32).to_le_bytes());
        assert_eq!(bytes, expected);
        let back = read_sparse(&bytes, ValueFormat::Fp32).unwrap();
        assert!(bitmask_decode(&back, DeficitPolicy::Error)
            .unwrap()
            .bit_eq(&t));
    }

    #[test]
    fn fixed_point_files() {
        let t = Tensor2D::new(2, 3, vec![0.5, 0.0, -1.25, 3.9, 0.0, -4.0]).unwrap();
        for fmt in [ValueFormat::Q3_13, ValueFormat::Q3_5] {
            let q = quantize(&t, fmt);
            let bytes = write_sparse(&bitmask_encode(&q), fmt).unwrap();
            let per_value = fmt.bits() as usize / 8;
            assert_eq!(bytes.len(), SPARSE_HEADER_BYTES + 1 + 4 * per_value);
            let back = read_sparse(&bytes, fmt).unwrap();
            assert!(bitmask_decode(&back, DeficitPolicy::Error)
                .unwrap()
                .bit_eq(&q));
            assert!(read_sparse(&bytes, ValueFormat::Fp32).is_err());
        }
        // off-grid values are rejected rather than silently rounded
        let off = bitmask_encode(&Tensor2D::new(1, 1, vec![0.01]).unwrap());
        assert!(write_sparse(&off, ValueFormat::Q3_5).is_err());
    }

    #[test]
    fn malformed_files() {
        assert!(read_sparse(&[0; 5], ValueFormat::Fp32).is_err());
        let mut bytes = write_sparse(
            &bitmask_encode(&Tensor2D::new(1, 2, vec![1.0, 2.0]).unwrap()),
            ValueFormat::Fp32,
        )
        .unwrap();
        bytes.pop();
        assert!(read_sparse(&bytes, ValueFormat::Fp32).is_err());
        assert!(SparseTensor::from_parts(3, 3, vec![0], vec![]).is_err());
    }
}
