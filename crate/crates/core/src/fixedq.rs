//! Bit-exact signed Q32.32 fixed-point arithmetic.
//!
//! A scalar is one 64-bit two's-complement word holding `value = raw * 2^-32`,
//! so the representable range is [-2^31, 2^31 - 2^-32] (the most negative
//! word is excluded so negation always stays in range). The operator set
//! mirrors a hardware datapath:
//!
//! * addition is exact integer addition (subtraction is `add(a, neg(b))`),
//! * multiplication takes the full 128-bit product and truncates toward
//!   negative infinity by an arithmetic shift,
//! * reciprocals run a fixed-count Newton iteration on a normalized operand,
//!   and division is `mul(a, reciprocal(b))`.
//!
//! Every operation is a pure function of its operand bits, so results are
//! deterministic across runs, platforms, and thread counts. Checked variants
//! are the default; `wrapping_*` forms exist for benchmarking only.

use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::wide::mul_q62_round;

/// Number of fractional bits.
pub const FRAC_BITS: u32 = 32;

/// One unit in the last place (2^-32) as a real value.
pub const ULP: f64 = 1.0 / 4294967296.0;

const SCALE: f64 = 4294967296.0; // 2^32
const TWO_POW_63: f64 = 9223372036854775808.0;

/// Signed Q32.32 fixed-point word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FixedQ(i64);

impl FixedQ {
    pub const ZERO: FixedQ = FixedQ(0);
    pub const ONE: FixedQ = FixedQ(1 << FRAC_BITS);
    /// Largest representable value, 2^31 - 2^-32.
    pub const MAX: FixedQ = FixedQ(i64::MAX);
    /// Most negative valid value, -(2^31 - 2^-32). `i64::MIN` is excluded.
    pub const MIN: FixedQ = FixedQ(i64::MIN + 1);

    /// Reinterpret a raw two's-complement word.
    #[inline]
    pub const fn from_raw(raw: i64) -> Self {
        FixedQ(raw)
    }

    /// The raw two's-complement word.
    #[inline]
    pub const fn raw(self) -> i64 {
        self.0
    }

    /// Exact conversion from an integer in (-2^31, 2^31).
    pub fn from_int(v: i64) -> Result<Self> {
        if v <= -(1 << 31) || v >= (1 << 31) {
            return Err(Error::Range(v as f64));
        }
        Ok(FixedQ(v << FRAC_BITS))
    }

    /// Round-to-nearest encoding of a real value; ties round away from zero.
    pub fn encode(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::Range(v));
        }
        let scaled = (v * SCALE).round();
        if scaled >= TWO_POW_63 || scaled <= -TWO_POW_63 {
            return Err(Error::Range(v));
        }
        Ok(FixedQ(scaled as i64))
    }

    /// Nearest binary64 value.
    #[inline]
    pub fn decode(self) -> f64 {
        self.0 as f64 / SCALE
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn neg(self) -> Result<Self> {
        self.0.checked_neg().map(FixedQ).ok_or(Error::Overflow("neg"))
    }

    /// Exact addition; errors when the signed 64-bit sum overflows.
    pub fn add(self, rhs: Self) -> Result<Self> {
        self.0
            .checked_add(rhs.0)
            .map(FixedQ)
            .ok_or(Error::Overflow("add"))
    }

    /// Subtraction as addition of the negated operand.
    pub fn sub(self, rhs: Self) -> Result<Self> {
        self.add(rhs.neg()?)
    }

    /// Full 128-bit product, arithmetic shift right by 32 (truncation toward
    /// negative infinity), narrowed back to 64 bits.
    pub fn mul(self, rhs: Self) -> Result<Self> {
        let wide = (self.0 as i128) * (rhs.0 as i128);
        i64::try_from(wide >> FRAC_BITS)
            .map(FixedQ)
            .map_err(|_| Error::Overflow("mul"))
    }

    /// Newton-Raphson reciprocal with a fixed iteration count.
    ///
    /// The magnitude is normalized to b' in [0.5, 1) by a leading-bit scan,
    /// seeded with y0 = 48/17 - (32/17) b' (max relative error 1/17), refined
    /// by five iterations y <- y (2 - b' y) in Q2.62 with round-to-nearest
    /// products, and denormalized by the opposite shift with a rounding
    /// conversion. Powers of two shortcut to an exact shift.
    ///
    /// |result - 1/a| <= 4 * 2^-32 over the whole valid range.
    pub fn reciprocal(self) -> Result<Self> {
        if self.0 == 0 {
            return Err(Error::DivByZero);
        }
        let negative = self.0 < 0;
        let mag = self.0.unsigned_abs();
        if mag == 1 {
            // 1 / 2^-32 = 2^32, unrepresentable
            return Err(Error::Range(self.decode()));
        }

        if mag.is_power_of_two() {
            let m = 63 - mag.leading_zeros(); // mag = 2^m, m in [1, 62]
            if m == 1 {
                // 1 / 2^-31 = 2^31 needs the excluded word
                return Err(Error::Range(self.decode()));
            }
            let raw = 1i64 << (64 - m);
            return Ok(FixedQ(if negative { -raw } else { raw }));
        }

        // Normalize to Q2.62: b' in (0.5, 1), or exactly 0.5 after the one
        // truncating shift when m = 62.
        let m = 63 - mag.leading_zeros();
        let b: i128 = if m <= 61 {
            (mag as i128) << (61 - m)
        } else {
            (mag >> (m - 61)) as i128
        };

        const C48_17: i128 = (48i128 << 62) / 17;
        const C32_17: i128 = (32i128 << 62) / 17;
        const TWO: i128 = 1i128 << 63;

        let mut y = C48_17 - mul_q62_round(C32_17, b);
        for _ in 0..5 {
            let t = TWO - mul_q62_round(b, y);
            y = mul_q62_round(y, t);
        }

        // 1/a = y * 2^-(m-31); Q2.62 -> Q32.32 is a shift by m-1.
        let shift = m - 1;
        let res = if shift == 0 {
            y
        } else {
            (y + (1i128 << (shift - 1))) >> shift
        };
        let raw = i64::try_from(res).map_err(|_| Error::Overflow("reciprocal"))?;
        Ok(FixedQ(if negative { -raw } else { raw }))
    }

    /// Division as multiplication by the Newton reciprocal.
    pub fn div(self, rhs: Self) -> Result<Self> {
        self.mul(rhs.reciprocal()?)
    }

    // Wrapping forms, benchmarking only: overflow wraps silently.

    #[inline]
    pub fn wrapping_add(self, rhs: Self) -> Self {
        FixedQ(self.0.wrapping_add(rhs.0))
    }

    #[inline]
    pub fn wrapping_neg(self) -> Self {
        FixedQ(self.0.wrapping_neg())
    }

    #[inline]
    pub fn wrapping_mul(self, rhs: Self) -> Self {
        FixedQ((((self.0 as i128) * (rhs.0 as i128)) >> FRAC_BITS) as i64)
    }
}

impl fmt::Display for FixedQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.decode(), f)
    }
}

/// Serializes as `{"decimal": <f64>, "raw": <i64>}`; the raw word is the
/// bit-exact carrier, the decimal is for human and downstream-float use.
impl Serialize for FixedQ {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("FixedQ", 2)?;
        st.serialize_field("decimal", &self.decode())?;
        st.serialize_field("raw", &self.0)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for FixedQ {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            raw: i64,
        }
        let repr = Repr::deserialize(deserializer)?;
        if repr.raw == i64::MIN {
            return Err(D::Error::custom("raw value -2^63 is excluded"));
        }
        Ok(FixedQ(repr.raw))
    }
}
