//! Fixed-point elementary functions.
//!
//! Two exponential units coexist, mirroring the datapath split:
//!
//! * [`exp_cordic`] / [`ln_cordic`] — shift-and-add iterations over the
//!   `ln(1 + 2^-i)` ROM (48 stages) with power-of-two range reduction,
//!   used by the general-purpose path and by [`pow`] / [`sqrt`] through
//!   the identity `x^y = exp(y ln x)`.
//! * [`exp_remez`] — a degree-6 minimax polynomial evaluated by Horner's
//!   scheme after base-sqrt(2) range reduction, the pipelined unit for
//!   the kernel hot loops.
//!
//! All internal arithmetic runs in Q2.62 on the normalized argument and
//! converts at the boundary, so results are bit-deterministic.

pub mod remez;

mod consts;

use crate::error::{Error, Result};
use crate::fixedq::FixedQ;
use consts::{EXP_POLY_Q62, HALF_LN2_62, LN1P_TABLE, LN2_62, SQRT2_62};

pub use remez::{remez_minimax, scan_error_extrema, PolyApprox, RemezTarget};

/// exp(x) underflows Q32.32 resolution below this argument (e^-21 < 2^-30).
const EXP_UNDERFLOW_RAW: i64 = -21 << 32;

/// Which exponential unit a kernel evaluation should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpImpl {
    Cordic,
    Remez,
}

impl ExpImpl {
    #[inline]
    pub fn eval(self, x: FixedQ) -> Result<FixedQ> {
        match self {
            ExpImpl::Cordic => exp_cordic(x),
            ExpImpl::Remez => exp_remez(x),
        }
    }
}

/// Shift-and-add exponential.
///
/// Reduces x = k ln2 + t with t in [0, ln2), decomposes e^t into a product
/// of (1 + 2^-i) factors so each step is one add and one shift, applies a
/// first-order correction for the sub-2^-48 residual, and scales by 2^k.
///
/// Returns 0 for x < -21; |result - e^x| <= max(2^-30, e^x * 2^-30).
pub fn exp_cordic(x: FixedQ) -> Result<FixedQ> {
    if x.raw() < EXP_UNDERFLOW_RAW {
        return Ok(FixedQ::ZERO);
    }
    let x62 = (x.raw() as i128) << 30;
    let k = x62.div_euclid(LN2_62);
    if k >= 31 {
        return Err(Error::Range(x.decode()));
    }
    let mut t = (x62 - k * LN2_62) as u64; // in [0, ln2 * 2^62)

    let mut acc: u64 = 1 << 62;
    for (idx, &c) in LN1P_TABLE.iter().enumerate() {
        let c = c as u64;
        if t >= c {
            t -= c;
            acc += acc >> (idx + 1);
        }
    }
    // first-order residual: e^r ~ 1 + r for r < ln(1 + 2^-48)
    let acc = acc as u128 + ((acc as u128 * t as u128) >> 62);

    let shift = (30 - k) as u32; // k <= 30, so always a right shift
    let raw = i64::try_from(acc >> shift).map_err(|_| Error::Overflow("exp"))?;
    Ok(FixedQ::from_raw(raw))
}

/// Shift-and-add natural logarithm for x > 0.
///
/// Normalizes x = w * 2^k with w in [1, 2), multiplies w up toward 2 by
/// (1 + 2^-i) factors while accumulating their logarithms from the ROM,
/// and corrects for the residual gap: ln x = (k+1) ln2 - sum - gap/2.
///
/// |result - ln x| <= 2^-30.
pub fn ln_cordic(x: FixedQ) -> Result<FixedQ> {
    if x.raw() <= 0 {
        return Err(Error::Domain("ln requires a positive argument"));
    }
    let mag = x.raw() as u64;
    let m = 63 - mag.leading_zeros(); // x in [2^(m-32), 2^(m-31))
    let k = m as i128 - 32;
    let mut v: u64 = mag << (62 - m); // w in [1, 2) as Q2.62

    const TWO: u64 = 1 << 63;
    let mut sum: i128 = 0;
    for (idx, &c) in LN1P_TABLE.iter().enumerate() {
        let stepped = v + (v >> (idx + 1));
        if stepped <= TWO {
            v = stepped;
            sum += c as i128;
        }
    }
    // ln(v/2) = ln(1 - gap/2) ~ -gap/2; second order is < 2^-97 here
    let gap = ((1u128 << 63) - v as u128) as i128;
    let result = (k + 1) * LN2_62 - sum - (gap >> 1);
    Ok(FixedQ::from_raw(crate::wide::round_shift_30(result) as i64))
}

/// x^y = exp(y ln x) for x > 0; relative error <= 2^-28 for |y| <= 1.
pub fn pow(x: FixedQ, y: FixedQ) -> Result<FixedQ> {
    if x.raw() <= 0 {
        return Err(Error::Domain("pow requires a positive base"));
    }
    exp_cordic(y.mul(ln_cordic(x)?)?)
}

/// Square root via `pow(x, 1/2)` (the exponent 0.5 is exact in Q32.32).
pub fn sqrt(x: FixedQ) -> Result<FixedQ> {
    const HALF: FixedQ = FixedQ::from_raw(1 << 31);
    match x.raw() {
        r if r < 0 => Err(Error::Domain("sqrt requires a non-negative argument")),
        0 => Ok(FixedQ::ZERO),
        _ => pow(x, HALF),
    }
}

/// Minimax-polynomial exponential, the pipelined unit for the kernel loops.
///
/// Reduces x = j (ln2/2) + t with t in [-ln2/4, ln2/4], evaluates the
/// embedded degree-6 polynomial by Horner's scheme in Q2.62, multiplies by
/// sqrt(2) when j is odd, and shifts by floor(j/2).
///
/// Returns 0 for x < -21; |result - e^x| <= 2^-30 absolute for x <= 0.
pub fn exp_remez(x: FixedQ) -> Result<FixedQ> {
    if x.raw() < EXP_UNDERFLOW_RAW {
        return Ok(FixedQ::ZERO);
    }
    let x62 = (x.raw() as i128) << 30;
    let j = div_round_nearest(x62, HALF_LN2_62);
    let t = x62 - j * HALF_LN2_62;

    let mut acc: i128 = EXP_POLY_Q62[EXP_POLY_Q62.len() - 1] as i128;
    for &c in EXP_POLY_Q62[..EXP_POLY_Q62.len() - 1].iter().rev() {
        acc = ((acc * t) >> 62) + c as i128;
    }

    let q = j.div_euclid(2);
    if j.rem_euclid(2) == 1 {
        acc = (acc * SQRT2_62) >> 62;
    }
    if q >= 31 {
        return Err(Error::Range(x.decode()));
    }
    let shift = (30 - q) as u32;
    Ok(FixedQ::from_raw((acc >> shift) as i64))
}

/// Nearest-integer division for positive divisors; halves round away from zero.
#[inline]
fn div_round_nearest(a: i128, b: i128) -> i128 {
    if a >= 0 {
        (a + b / 2) / b
    } else {
        -((-a + b / 2) / b)
    }
}
