//! IEEE 754 binary16 encoding with explicit sign, exponent and fraction fields.

use std::fmt;

use crate::{Error, Result};

const EXP_BIAS: i32 = 15;
const FRACTION_BITS: u32 = 10;
const MAX_FINITE: u16 = 0x7BFF;

/// A binary16 bit pattern laid out as sign, 5-bit biased exponent, 10-bit fraction.
///
/// The encoder never produces exponent 31; such patterns fail to decode.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Float16Bits(u16);

impl Float16Bits {
    pub const fn from_bits(bits: u16) -> Self {
        Self(bits)
    }

    /// Assemble from fields; `exponent` is masked to 5 bits and `fraction` to 10 bits.
    pub const fn from_parts(sign: bool, exponent: u8, fraction: u16) -> Self {
        Self(((sign as u16) << 15) | (((exponent & 0x1F) as u16) << 10) | (fraction & 0x3FF))
    }

    pub const fn to_bits(self) -> u16 {
        self.0
    }

    pub const fn sign(self) -> bool {
        self.0 & 0x8000 != 0
    }

    /// Biased exponent `E`.
    pub const fn exponent(self) -> u8 {
        ((self.0 >> 10) & 0x1F) as u8
    }

    /// Fraction bits `b9..b0` as an integer.
    pub const fn fraction(self) -> u16 {
        self.0 & 0x3FF
    }

    /// The 16 bits, sign first, then exponent and fraction MSB-first.
    pub fn bit_vector(self) -> [u8; 16] {
        let mut out = [0u8; 16];
        for (k, b) in out.iter_mut().enumerate() {
            *b = ((self.0 >> (15 - k)) & 1) as u8;
        }
        out
    }
}

impl fmt::Debug for Float16Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Float16Bits({} {:05b} {:010b})",
            self.sign() as u8,
            self.exponent(),
            self.fraction()
        )
    }
}

/// Round `x` to the nearest binary16 value, ties to even.
///
/// Subnormals are kept, signed zeros are preserved and magnitudes past the largest finite
/// value saturate at ±65504.
pub fn encode_float16(x: f64) -> Result<Float16Bits> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    let raw = x.to_bits();
    let sign = ((raw >> 63) as u16) << 15;
    let biased = ((raw >> 52) & 0x7FF) as i32;
    if biased == 0 {
        // Zero or an f64 subnormal, both far below half the smallest binary16 subnormal.
        return Ok(Float16Bits(sign));
    }
    let exp = biased - 1023;
    if exp > EXP_BIAS {
        return Ok(Float16Bits(sign | MAX_FINITE));
    }
    let significand = (raw & ((1u64 << 52) - 1)) | (1u64 << 52);

    // Count the value in units of the binary16 quantum for its binade (2^-24 below the
    // normal range), rounding the discarded bits to nearest-even.
    let quantum_exp = exp.max(1 - EXP_BIAS) - FRACTION_BITS as i32;
    let shift = (quantum_exp - (exp - 52)) as u32;
    let units = if shift >= 54 {
        0
    } else {
        let kept = significand >> shift;
        let rem = significand & ((1u64 << shift) - 1);
        let half = 1u64 << (shift - 1);
        if rem > half || (rem == half && kept & 1 == 1) {
            kept + 1
        } else {
            kept
        }
    };
    // `units` already carries the implicit leading one for normals, so adding it on top of
    // (E - 1) << 10 yields the pattern, including the carry into the next binade.
    let base = ((exp.max(1 - EXP_BIAS) + EXP_BIAS - 1) as u64) << FRACTION_BITS;
    let magnitude = if exp < 1 - EXP_BIAS { units } else { base + units };
    let magnitude = magnitude.min(MAX_FINITE as u64) as u16;
    Ok(Float16Bits(sign | magnitude))
}

/// Exact value of a binary16 pattern.
///
/// Normals evaluate `(-1)^s * 2^(E-15) * (1 + fraction/1024)`; `E = 0` is subnormal,
/// `(-1)^s * 2^-14 * fraction/1024`.
pub fn decode_float16(bits: Float16Bits) -> Result<f64> {
    let e = bits.exponent() as i32;
    if e == 0x1F {
        return Err(Error::InfNan(bits.0));
    }
    let frac = bits.fraction() as f64 / 1024.0;
    let magnitude = if e == 0 {
        2f64.powi(1 - EXP_BIAS) * frac
    } else {
        2f64.powi(e - EXP_BIAS) * (1.0 + frac)
    };
    Ok(if bits.sign() { -magnitude } else { magnitude })
}

/// Two's-complement pattern of a signed 16-bit value, MSB first.
pub fn encode_int16(s: i64) -> Result<[u8; 16]> {
    let v = i16::try_from(s).map_err(|_| Error::OutOfRange(s))?;
    Ok(Float16Bits(v as u16).bit_vector())
}

/// Reinterpret a 16-bit MSB-first vector as a two's-complement integer.
pub fn decode_int16(bits: &[u8; 16]) -> i16 {
    bits.iter().fold(0u16, |acc, &b| (acc << 1) | (b & 1) as u16) as i16
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minus_049() {
        let b = encode_float16(-0.49).unwrap();
        assert!(b.sign());
        assert_eq!(b.exponent(), 0b01101);
        assert_eq!(b.fraction(), 0b1111010111);
        assert_eq!(decode_float16(b).unwrap(), -0.489990234375);
        assert_eq!(
            b.bit_vector(),
            [1, 0, 1, 1, 0, 1, 1, 1, 1, 1, 0, 1, 0, 1, 1, 1]
        );
    }

    #[test]
    fn zero_and_one() {
        assert_eq!(encode_float16(0.0).unwrap().to_bits(), 0);
        assert_eq!(encode_float16(-0.0).unwrap().to_bits(), 0x8000);
        let one = encode_float16(1.0).unwrap();
        assert_eq!((one.sign(), one.exponent(), one.fraction()), (false, 0b01111, 0));
        assert_eq!(decode_float16(Float16Bits::from_parts(false, 15, 0)).unwrap(), 1.0);
        assert_eq!(decode_float16(Float16Bits::from_bits(0)).unwrap(), 0.0);
    }

    #[test]
    fn saturates_and_rejects_non_finite() {
        assert_eq!(encode_float16(1e6).unwrap().to_bits(), 0x7BFF);
        assert_eq!(encode_float16(-65520.0).unwrap().to_bits(), 0xFBFF);
        assert_eq!(decode_float16(Float16Bits::from_bits(0x7BFF)).unwrap(), 65504.0);
        assert!(encode_float16(f64::NAN).is_err());
        assert!(encode_float16(f64::INFINITY).is_err());
        assert!(matches!(decode_float16(Float16Bits::from_bits(0x7C00)), Err(Error::InfNan(_))));
    }

    #[test]
    fn subnormals_and_ties() {
        let tiny = 2f64.powi(-24);
        assert_eq!(encode_float16(tiny).unwrap().to_bits(), 1);
        // exactly half the smallest subnormal ties to even (zero)
        assert_eq!(encode_float16(tiny / 2.0).unwrap().to_bits(), 0);
        assert_eq!(encode_float16(tiny * 1.5).unwrap().to_bits(), 2);
        // largest subnormal rounds up into the first normal binade
        assert_eq!(encode_float16(2f64.powi(-14) * (1.0 - 2f64.powi(-12))).unwrap().to_bits(), 0x0400);
        // 1 + 2^-11 is a tie between 1 and 1 + 2^-10, goes to the even fraction
        assert_eq!(encode_float16(1.0 + 2f64.powi(-11)).unwrap().to_bits(), 0x3C00);
        assert_eq!(encode_float16(1.0 + 3.0 * 2f64.powi(-11)).unwrap().to_bits(), 0x3C02);
    }

    #[test]
    fn int16_patterns() {
        assert_eq!(encode_int16(0).unwrap(), [0; 16]);
        let mut min = [0; 16];
        min[0] = 1;
        assert_eq!(encode_int16(-32768).unwrap(), min);
        let mut one = [0; 16];
        one[15] = 1;
        assert_eq!(encode_int16(1).unwrap(), one);
        assert!(matches!(encode_int16(32768), Err(Error::OutOfRange(32768))));
        assert!(encode_int16(-32769).is_err());
    }

    #[test]
    fn int16_round_trips_exhaustively() {
        for v in i16::MIN..=i16::MAX {
            assert_eq!(decode_int16(&encode_int16(v as i64).unwrap()), v);
        }
    }

    proptest! {
        #[test]
        fn half_ulp_error(x in -1.0f64..1.0) {
            let b = encode_float16(x).unwrap();
            let y = decode_float16(b).unwrap();
            if b.exponent() > 0 {
                let bound = 2f64.powi(b.exponent() as i32 - 15) * 2f64.powi(-11);
                prop_assert!((y - x).abs() <= bound, "x={x} y={y}");
            } else {
                prop_assert!((y - x).abs() <= 2f64.powi(-25));
            }
        }

        #[test]
        fn monotone(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let dl = decode_float16(encode_float16(lo).unwrap()).unwrap();
            let dh = decode_float16(encode_float16(hi).unwrap()).unwrap();
            prop_assert!(dl <= dh);
        }
    }
}
