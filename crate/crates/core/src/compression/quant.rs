use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Tensor2D;
use crate::error::{Error, Result};

/// Widest fixed-point code whose values `f32` still represents exactly.
const MAX_FIXED_WIDTH: u32 = 24;

/// Signed fixed-point format Q(i,f): `i` integer bits including the sign,
/// `f` fraction bits. Values lie on a `2^-f` grid spanning
/// `[-2^(i-1), 2^(i-1) - 2^-f]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedPointFormat {
    int_bits: u32,
    frac_bits: u32,
}

impl FixedPointFormat {
    pub const Q3_13: Self = Self {
        int_bits: 3,
        frac_bits: 13,
    };
    pub const Q3_5: Self = Self {
        int_bits: 3,
        frac_bits: 5,
    };

    pub fn new(int_bits: u32, frac_bits: u32) -> Result<Self> {
        if int_bits == 0 {
            return Err(Error::field("format", "needs at least the sign bit"));
        }
        if int_bits + frac_bits > MAX_FIXED_WIDTH {
            return Err(Error::field(
                "format",
                format!("Q({int_bits},{frac_bits}) is wider than {MAX_FIXED_WIDTH} bits"),
            ));
        }
        Ok(Self {
            int_bits,
            frac_bits,
        })
    }

    pub fn int_bits(&self) -> u32 {
        self.int_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn width(&self) -> u32 {
        self.int_bits + self.frac_bits
    }

    pub fn step(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn min_code(&self) -> i64 {
        -(1i64 << (self.width() - 1))
    }

    pub fn max_code(&self) -> i64 {
        (1i64 << (self.width() - 1)) - 1
    }

    pub fn min_value(&self) -> f64 {
        self.min_code() as f64 * self.step()
    }

    pub fn max_value(&self) -> f64 {
        self.max_code() as f64 * self.step()
    }

    /// Saturating round-half-to-even conversion to an integer code.
    /// NaN maps to code 0.
    pub fn encode(&self, x: f32) -> i64 {
        if x.is_nan() {
            return 0;
        }
        let scaled = (x as f64 * (self.frac_bits as f64).exp2()).round_ties_even();
        scaled.clamp(self.min_code() as f64, self.max_code() as f64) as i64
    }

    pub fn decode(&self, code: i64) -> f32 {
        (code as f64 * self.step()) as f32
    }

    /// Exact code of `x` if it already lies on this format's grid.
    pub fn exact_code(&self, x: f32) -> Option<i64> {
        let code = self.encode(x);
        (self.decode(code).to_bits() == x.to_bits() || (x == 0.0 && code == 0)).then_some(code)
    }
}

impl fmt::Display for FixedPointFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}_{}", self.int_bits, self.frac_bits)
    }
}

/// Storage format of weight and activation values: IEEE single precision or
/// a fixed-point format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueFormat {
    Fp32,
    Fixed(FixedPointFormat),
}

impl ValueFormat {
    pub const Q3_13: Self = ValueFormat::Fixed(FixedPointFormat::Q3_13);
    pub const Q3_5: Self = ValueFormat::Fixed(FixedPointFormat::Q3_5);

    /// The three formats the hardware study compares.
    pub const STUDY: [ValueFormat; 3] = [ValueFormat::Fp32, Self::Q3_13, Self::Q3_5];

    pub fn bits(&self) -> u32 {
        match self {
            ValueFormat::Fp32 => 32,
            ValueFormat::Fixed(q) => q.width(),
        }
    }
}

impl fmt::Display for ValueFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueFormat::Fp32 => f.write_str("fp32"),
            ValueFormat::Fixed(q) => q.fmt(f),
        }
    }
}

impl FromStr for ValueFormat {
    type Err = Error;

    /// Accepts `fp32`, `q3_13`, `Q3.13` and `q(3,13)` spellings.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "fp32" {
            return Ok(ValueFormat::Fp32);
        }
        let body = lower
            .strip_prefix('q')
            .map(|b| b.trim_start_matches('(').trim_end_matches(')'))
            .ok_or_else(|| Error::field("format", format!("unrecognised format `{s}`")))?;
        let mut parts = body.split(['_', '.', ',']);
        let parse = |p: Option<&str>| {
            p.and_then(|v| v.trim().parse::<u32>().ok())
                .ok_or_else(|| Error::field("format", format!("unrecognised format `{s}`")))
        };
        let i = parse(parts.next())?;
        let f = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::field("format", format!("unrecognised format `{s}`")));
        }
        Ok(ValueFormat::Fixed(FixedPointFormat::new(i, f)?))
    }
}

impl Serialize for ValueFormat {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ValueFormat {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn quantize_value(x: f32, fmt: FixedPointFormat) -> f32 {
    fmt.decode(fmt.encode(x))
}

/// Maps every element onto the format grid with round-half-to-even and
/// saturation. `Fp32` is a pass-through.
pub fn quantize(t: &Tensor2D, fmt: ValueFormat) -> Tensor2D {
    match fmt {
        ValueFormat::Fp32 => t.clone(),
        ValueFormat::Fixed(q) => t.map(|x| quantize_value(x, q)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const Q13: FixedPointFormat = FixedPointFormat::Q3_13;

    #[test]
    fn zero_is_fixed() {
        for fmt in ValueFormat::STUDY {
            let t = quantize(&Tensor2D::zeros(1, 1), fmt);
            assert_eq!(t.data()[0], 0.0);
        }
    }

    #[test]
    fn saturates_at_both_ends() {
        assert_eq!(quantize_value(100.0, Q13) as f64, 4.0 - (-13f64).exp2());
        assert_eq!(quantize_value(-100.0, Q13), -4.0);
        assert_eq!(quantize_value(f32::INFINITY, Q13) as f64, Q13.max_value());
        assert_eq!(quantize_value(f32::NAN, Q13), 0.0);
    }

    #[test]
    fn ties_round_to_even() {
        // 1 + 2^-14 sits halfway between codes 8192 and 8193.
        let x = 1.0 + (-14f32).exp2();
        assert_eq!(Q13.encode(x), 8192);
        assert_eq!(quantize_value(x, Q13), 1.0);
        let y = 1.0 + 3.0 * (-14f32).exp2();
        assert_eq!(Q13.encode(y), 8194);
    }

    #[test]
    fn format_strings() {
        assert_eq!("fp32".parse::<ValueFormat>().unwrap(), ValueFormat::Fp32);
        assert_eq!("q3_13".parse::<ValueFormat>().unwrap(), ValueFormat::Q3_13);
        assert_eq!("Q(3,5)".parse::<ValueFormat>().unwrap(), ValueFormat::Q3_5);
        assert_eq!(ValueFormat::Q3_5.to_string(), "q3_5");
        assert!("q0_8".parse::<ValueFormat>().is_err());
        assert!("q3".parse::<ValueFormat>().is_err());
        assert!("int8".parse::<ValueFormat>().is_err());
    }

    proptest! {
        #[test]
        fn idempotent(x in -10.0f32..10.0, i in 1u32..6, f in 0u32..14) {
            let q = FixedPointFormat::new(i, f).unwrap();
            let once = quantize_value(x, q);
            prop_assert_eq!(quantize_value(once, q).to_bits(), once.to_bits());
        }

        #[test]
        fn half_step_bound_in_range(x in -4.0f32..3.99) {
            let err = (quantize_value(x, Q13) as f64 - x as f64).abs();
            prop_assert!(err <= (-14f64).exp2());
        }
    }
}
