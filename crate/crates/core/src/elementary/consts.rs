//! Q2.62 constant ROMs for the elementary-function units.
//!
//! Values are round-to-nearest encodings computed at 60 decimal digits;
//! `table_consistency` cross-checks every entry against binary64 recomputation.

/// ln 2.
pub(crate) const LN2_62: i128 = 3196577161300663915;

/// ln 2 / 2, the step of the base-sqrt(2) range reduction.
pub(crate) const HALF_LN2_62: i128 = 1598288580650331957;

/// sqrt(2), the odd-step corrector of the base-sqrt(2) range reduction.
pub(crate) const SQRT2_62: i128 = 6521908912666391106;

/// ln(1 + 2^-i) for i = 1..=48: the shift-and-add decomposition ROM.
pub(crate) const LN1P_TABLE: [i64; 48] = [
    1869877770022570995, // i = 1
    1029067995697975510,
    543178378744478074,
    279581720803300556,
    141909228037287941,
    71500440275001118,
    35888788270063140,
    17979305495762817,
    8998414598213862,
    4501402034722952,
    2251250236762820,
    1125762490254678,
    562915596478891,
    281466387125573,
    140735340915370,
    70368207312213,
    35184237871787,
    17592152490069,
    8796084633611,
    4398044413953,
    2199022731264,
    1099511496704,
    549755781120,
    274877898752,
    137438951424,
    68719476224,
    34359738240,
    17179869152,
    8589934584,
    4294967294,
    2147483648,
    1073741824,
    536870912,
    268435456,
    134217728,
    67108864,
    33554432,
    16777216,
    8388608,
    4194304,
    2097152,
    1048576,
    524288,
    262144,
    131072,
    65536,
    32768,
    16384, // i = 48
];

/// Degree-6 minimax coefficients for e^t on [-ln2/4, ln2/4], low order
/// first, certified max absolute error 1.457e-11 < 2^-34 (the generator
/// test re-derives and re-certifies them).
pub(crate) const EXP_POLY_Q62: [i64; 7] = [
    4611686018425933622, // 0.9999999999996846...
    4611686021139360790, // 1.0000000005880653...
    2305843010424383763, // 0.5000000002625265...
    768613613954878870,  // 0.1666665100103628...
    192153416392162511,  // 0.0416666303005788...
    38478826255814373,   // 0.0083437654042492...
    6412851231643622,    // 0.0013905654474348...
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_consistency() {
        let q = (1u128 << 62) as f64;
        for (idx, &c) in LN1P_TABLE.iter().enumerate() {
            let i = idx as i32 + 1;
            let expect = (2f64.powi(-i)).ln_1p();
            let got = c as f64 / q;
            // half a Q2.62 ulp of quantization plus binary64 noise
            assert!(
                (got - expect).abs() <= expect * 1e-15 + 1.2e-19,
                "ln(1+2^-{i}): rom {got:e} vs libm {expect:e}"
            );
        }
        assert!((LN2_62 as f64 / q - std::f64::consts::LN_2).abs() < 1e-16);
        assert!((HALF_LN2_62 as f64 / q - std::f64::consts::LN_2 / 2.0).abs() < 1e-16);
        assert!((SQRT2_62 as f64 / q - std::f64::consts::SQRT_2).abs() < 1e-15);
    }
}
