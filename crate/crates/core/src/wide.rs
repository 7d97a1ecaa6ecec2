//! Wide-integer helpers for the Q2.62 working format used inside the
//! elementary-function units and the Newton reciprocal.

/// Round-to-nearest Q2.62 product (half away rounds up). Used where one
/// extra bit of accuracy matters, e.g. the Newton iterations.
#[inline]
pub(crate) fn mul_q62_round(a: i128, b: i128) -> i128 {
    ((a * b) + (1 << 61)) >> 62
}

/// Q.62 -> Q32.32 conversion with round-to-nearest (half rounds up).
#[inline]
pub(crate) fn round_shift_30(v: i128) -> i128 {
    (v + (1 << 29)) >> 30
}
