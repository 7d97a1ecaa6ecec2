//! The seven-step PLUGIN bandwidth selector over Q32.32 fixed point.
//!
//! Pipeline: variance/standard deviation (I), z-score standardization, the
//! constant eighth-functional estimate (II), pilot bandwidth g1 (III), the
//! sixth-functional double sum (IV), pilot bandwidth g2 (V), the fourth-
//! functional double sum (VI), and the final bandwidth (VII) rescaled by
//! the original standard deviation.
//!
//! The double sums exploit kernel symmetry: only i < j pairs are computed,
//! doubled, and completed with the n * K(0) diagonal. Per-term kernel words
//! accumulate into a 128-bit integer, so summation is exactly associative
//! and results are bit-identical under any loop chunking.
//!
//! Three loop strategies model the hardware variants: `literal` divides by
//! the pilot bandwidth inside the loop (the Newton reciprocal is recomputed
//! every term), `minimal` hoists the reciprocal out of the loop, and `fast`
//! additionally unrolls the inner loop by two and evaluates the kernel
//! exponential with the pipelined minimax unit instead of the shift-and-add
//! one.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::elementary::{self, ExpImpl};
use crate::error::{Error, Result};
use crate::fixedq::FixedQ;

/// Input sample, kept in its source binary64 representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
}

impl Dataset {
    /// Validates n >= 2 and that every value is finite and encodable.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::EmptyInput);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value.abs() >= 2147483648.0 {
                return Err(Error::InvalidValue { index, value });
            }
        }
        Ok(Dataset { values })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // n >= 2 by construction
    }
}

/// z-scored sample with the moments of the original data.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedDataset {
    pub z: Vec<FixedQ>,
    pub mu: FixedQ,
    pub sigma: FixedQ,
}

/// Closed-form Gaussian-kernel constants used by Steps II-VII.
#[derive(Debug, Clone, Copy)]
pub struct KernelConstants {
    /// K^(6)(0) = -15 / sqrt(2 pi)
    pub k6_at_0: FixedQ,
    /// K^(4)(0) = 3 / sqrt(2 pi)
    pub k4_at_0: FixedQ,
    /// mu_2(K) = 1
    pub mu2: FixedQ,
    /// R(K) = 1 / (2 sqrt(pi))
    pub r_k: FixedQ,
    /// Psi_8 of a standardized sample, 105 / (32 sqrt(pi))
    pub psi8_ns_std: FixedQ,
}

impl KernelConstants {
    pub fn standard() -> Self {
        let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let enc = |v: f64| FixedQ::encode(v).expect("kernel constant in range");
        KernelConstants {
            k6_at_0: enc(-15.0 / sqrt_2pi),
            k4_at_0: enc(3.0 / sqrt_2pi),
            mu2: FixedQ::ONE,
            r_k: enc(0.5 / sqrt_pi),
            psi8_ns_std: enc(105.0 / (32.0 * sqrt_pi)),
        }
    }
}

/// Loop-implementation variant of the double-sum steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Literal,
    Minimal,
    #[default]
    Fast,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Literal, Strategy::Minimal, Strategy::Fast];

    /// Exponential unit the kernel evaluations use under this strategy.
    #[inline]
    pub fn exp_impl(self) -> ExpImpl {
        match self {
            Strategy::Literal | Strategy::Minimal => ExpImpl::Cordic,
            Strategy::Fast => ExpImpl::Remez,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Literal => "literal",
            Strategy::Minimal => "minimal",
            Strategy::Fast => "fast",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "literal" => Ok(Strategy::Literal),
            "minimal" => Ok(Strategy::Minimal),
            "fast" => Ok(Strategy::Fast),
            other => Err(format!(
                "unknown strategy {other:?}, expected literal, minimal or fast"
            )),
        }
    }
}

/// All Step I-VII intermediates plus the final bandwidth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandwidthResult {
    pub v_hat: FixedQ,
    pub sigma_hat: FixedQ,
    pub psi8: FixedQ,
    pub g1: FixedQ,
    pub psi6: FixedQ,
    pub g2: FixedQ,
    pub psi4: FixedQ,
    pub h_std: FixedQ,
    pub h_final: FixedQ,
    pub strategy: Strategy,
    /// Wall time of the pipeline; excluded from the determinism contract.
    #[serde(rename = "elapsed_seconds", with = "duration_secs")]
    pub elapsed: Duration,
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        d.as_secs_f64().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

/// Step I: V = sum(X^2)/(n-1) - (sum X)^2 / (n (n-1)), sigma = sqrt(V).
///
/// Both sums accumulate in 128-bit raws; each square is truncated like the
/// datapath multiplier. Errors with `DegenerateData` when V <= 0.
pub fn variance_std(data: &Dataset) -> Result<(FixedQ, FixedQ)> {
    let n = data.len() as i128;
    let mut sum: i128 = 0;
    let mut sum_sq: i128 = 0;
    for &v in data.values() {
        let r = FixedQ::encode(v)?.raw() as i128;
        sum += r;
        sum_sq += (r * r) >> 32;
    }
    let term1 = sum_sq / (n - 1);
    let sq = sum.checked_mul(sum).ok_or(Error::Overflow("variance"))?; // Q64.64
    let term2 = (sq / (n * (n - 1))) >> 32;
    let v_raw = term1 - term2;
    if v_raw <= 0 {
        return Err(Error::DegenerateData);
    }
    let v = FixedQ::from_raw(i64::try_from(v_raw).map_err(|_| Error::Overflow("variance"))?);
    Ok((v, elementary::sqrt(v)?))
}

/// z-score standardization: z_i = (X_i - mu) * reciprocal(sigma), with the
/// Step-I (Bessel-corrected) sigma.
pub fn standardize(data: &Dataset) -> Result<StandardizedDataset> {
    let (_, sigma) = variance_std(data)?;
    let n = data.len() as i128;
    let mut sum: i128 = 0;
    for &v in data.values() {
        sum += FixedQ::encode(v)?.raw() as i128;
    }
    let mu = FixedQ::from_raw((sum / n) as i64);
    let r_sigma = sigma.reciprocal()?;
    let z = data
        .values()
        .iter()
        .map(|&v| FixedQ::encode(v)?.sub(mu)?.mul(r_sigma))
        .collect::<Result<Vec<_>>>()?;
    Ok(StandardizedDataset { z, mu, sigma })
}

/// Step III pilot bandwidth over standardized data, where the eighth
/// functional is the constant 105/(32 sqrt(pi)):
/// g1 = ( (2 * 15/sqrt(2 pi)) / (psi8 * n) )^(1/9).
pub fn g1_bandwidth(n: usize) -> Result<FixedQ> {
    let consts = KernelConstants::standard();
    let numer = consts.k6_at_0.neg()?.add(consts.k6_at_0.neg()?)?; // -2 K6(0)
    let denom = consts.psi8_ns_std.mul(FixedQ::from_int(n as i64)?)?;
    let ninth = FixedQ::encode(1.0 / 9.0)?;
    elementary::pow(numer.div(denom)?, ninth)
}

/// Sixth-derivative Gaussian kernel,
/// K^(6)(x) = (x^6 - 15 x^4 + 45 x^2 - 15) e^(-x^2/2) / sqrt(2 pi),
/// evaluated by Horner in u = x^2 so K(x) = K(-x) holds bit-exactly.
pub fn k6(x: FixedQ, exp_impl: ExpImpl) -> Result<FixedQ> {
    let fifteen = FixedQ::from_int(15)?;
    let forty_five = FixedQ::from_int(45)?;
    let u = x.mul(x)?;
    let p = u.sub(fifteen)?.mul(u)?.add(forty_five)?.mul(u)?.sub(fifteen)?;
    finish_kernel(p, u, exp_impl)
}

/// Fourth-derivative Gaussian kernel,
/// K^(4)(x) = (x^4 - 6 x^2 + 3) e^(-x^2/2) / sqrt(2 pi).
pub fn k4(x: FixedQ, exp_impl: ExpImpl) -> Result<FixedQ> {
    let six = FixedQ::from_int(6)?;
    let three = FixedQ::from_int(3)?;
    let u = x.mul(x)?;
    let p = u.sub(six)?.mul(u)?.add(three)?;
    finish_kernel(p, u, exp_impl)
}

fn finish_kernel(p: FixedQ, u: FixedQ, exp_impl: ExpImpl) -> Result<FixedQ> {
    const NEG_HALF: FixedQ = FixedQ::from_raw(-(1 << 31));
    let inv_sqrt_2pi = FixedQ::encode(1.0 / (2.0 * std::f64::consts::PI).sqrt())?;
    let e = exp_impl.eval(u.mul(NEG_HALF)?)?;
    p.mul(e)?.mul(inv_sqrt_2pi)
}

#[derive(Clone, Copy)]
enum KernelOrder {
    Six,
    Four,
}

impl KernelOrder {
    fn eval(self, x: FixedQ, exp_impl: ExpImpl) -> Result<FixedQ> {
        match self {
            KernelOrder::Six => k6(x, exp_impl),
            KernelOrder::Four => k4(x, exp_impl),
        }
    }

    fn at_zero(self, consts: &KernelConstants) -> FixedQ {
        match self {
            KernelOrder::Six => consts.k6_at_0,
            KernelOrder::Four => consts.k4_at_0,
        }
    }

    fn pilot_power(self) -> u32 {
        match self {
            KernelOrder::Six => 7,
            KernelOrder::Four => 5,
        }
    }
}

/// Symmetry-halved functional estimate:
/// Psi = (2 * sum_{i<j} K((z_i - z_j)/g) + n K(0)) / (n^2 g^p).
fn psi_estimate(z: &[FixedQ], g: FixedQ, strategy: Strategy, order: KernelOrder) -> Result<FixedQ> {
    let n = z.len();
    let exp_impl = strategy.exp_impl();
    let mut acc: i128 = 0;

    match strategy {
        Strategy::Literal => {
            // straight rewrite: the division (and its Newton reciprocal)
            // runs inside the inner loop
            for i in 0..n {
                for j in (i + 1)..n {
                    let term = order.eval(z[i].sub(z[j])?.div(g)?, exp_impl)?;
                    acc += term.raw() as i128;
                }
            }
        }
        Strategy::Minimal => {
            let rg = g.reciprocal()?;
            for i in 0..n {
                for j in (i + 1)..n {
                    let term = order.eval(z[i].add(z[j].neg()?)?.mul(rg)?, exp_impl)?;
                    acc += term.raw() as i128;
                }
            }
        }
        Strategy::Fast => {
            // inner loop manually unrolled by two
            let rg = g.reciprocal()?;
            for i in 0..n {
                let mut row: i128 = 0;
                let mut j = i + 1;
                while j < n {
                    let t1 = order.eval(z[i].add(z[j].neg()?)?.mul(rg)?, exp_impl)?;
                    row += t1.raw() as i128;
                    if j + 1 < n {
                        let t2 = order.eval(z[i].add(z[j + 1].neg()?)?.mul(rg)?, exp_impl)?;
                        row += t2.raw() as i128;
                    }
                    j += 2;
                }
                acc += row;
            }
        }
    }

    let consts = KernelConstants::standard();
    let bracket = 2 * acc + (n as i128) * (order.at_zero(&consts).raw() as i128);
    let bracket =
        FixedQ::from_raw(i64::try_from(bracket).map_err(|_| Error::Overflow("psi sum"))?);

    let n_fq = FixedQ::from_int(n as i64)?;
    let denom = n_fq.mul(n_fq)?.mul(pow_uint(g, order.pilot_power())?)?;
    bracket.div(denom)
}

/// Small positive integer power by repeated multiplication (exact exponent,
/// no exp/ln detour).
fn pow_uint(base: FixedQ, power: u32) -> Result<FixedQ> {
    let mut acc = base;
    for _ in 1..power {
        acc = acc.mul(base)?;
    }
    Ok(acc)
}

/// Step IV: the sixth-functional estimate at pilot bandwidth g1. Negative
/// for any non-pathological sample (the true functional is
/// -integral((f''')^2) < 0).
pub fn psi6(z: &StandardizedDataset, g1: FixedQ, strategy: Strategy) -> Result<FixedQ> {
    psi_estimate(&z.z, g1, strategy, KernelOrder::Six)
}

/// Step VI: the fourth-functional estimate at pilot bandwidth g2.
pub fn psi4(z: &StandardizedDataset, g2: FixedQ, strategy: Strategy) -> Result<FixedQ> {
    psi_estimate(&z.z, g2, strategy, KernelOrder::Four)
}

/// Step V pilot bandwidth: g2 = ( -2 K4(0) / (psi6 * n) )^(1/7).
///
/// `psi6` is the signed Step IV estimate; it must be negative for the
/// argument of the odd root to be positive.
pub fn g2_bandwidth(psi6: FixedQ, n: usize) -> Result<FixedQ> {
    if psi6.raw() >= 0 {
        return Err(Error::Domain(
            "psi6 estimate must be negative for the Step V root",
        ));
    }
    let consts = KernelConstants::standard();
    let numer = consts.k4_at_0.neg()?.add(consts.k4_at_0.neg()?)?; // -2 K4(0)
    let denom = psi6.mul(FixedQ::from_int(n as i64)?)?;
    let seventh = FixedQ::encode(1.0 / 7.0)?;
    elementary::pow(numer.div(denom)?, seventh)
}

/// Runs Steps I-VII on standardized data and rescales:
/// h_std = ( R(K) / (mu2^2 psi4 n) )^(1/5), h_final = h_std * sigma.
pub fn bandwidth(data: &Dataset, strategy: Strategy) -> Result<BandwidthResult> {
    let start = Instant::now();
    let n = data.len();
    let consts = KernelConstants::standard();

    let (v_hat, sigma_hat) = variance_std(data)?;
    let std = standardize(data)?;
    let psi8 = consts.psi8_ns_std;
    let g1 = g1_bandwidth(n)?;
    let psi6_hat = psi6(&std, g1, strategy)?;
    let g2 = g2_bandwidth(psi6_hat, n)?;
    let psi4_hat = psi4(&std, g2, strategy)?;
    if psi4_hat.raw() <= 0 {
        return Err(Error::Domain(
            "psi4 estimate must be positive for the Step VII root",
        ));
    }

    let n_fq = FixedQ::from_int(n as i64)?;
    let fifth = FixedQ::encode(0.2)?;
    let h_std = elementary::pow(consts.r_k.div(psi4_hat.mul(n_fq)?)?, fifth)?;
    let h_final = h_std.mul(sigma_hat)?;

    Ok(BandwidthResult {
        v_hat,
        sigma_hat,
        psi8,
        g1,
        psi6: psi6_hat,
        g2,
        psi4: psi4_hat,
        h_std,
        h_final,
        strategy,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    const TOY: [f64; 8] = [0.0, 1.0, 1.1, 1.5, 1.9, 2.8, 2.9, 3.5];
    const REL20: f64 = 9.5367431640625e-7; // 2^-20
    const ABS24: f64 = 5.9604644775390625e-8; // 2^-24

    fn fq(v: f64) -> FixedQ {
        FixedQ::encode(v).unwrap()
    }

    fn dataset(values: &[f64]) -> Dataset {
        Dataset::new(values.to_vec()).unwrap()
    }

    fn normal_sample(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Dataset::new((0..n).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
    }

    fn k6_ref(x: f64) -> f64 {
        let u = x * x;
        (((u - 15.0) * u + 45.0) * u - 15.0) * (-0.5 * u).exp()
            / (2.0 * std::f64::consts::PI).sqrt()
    }

    fn k4_ref(x: f64) -> f64 {
        let u = x * x;
        ((u - 6.0) * u + 3.0) * (-0.5 * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn dataset_validation() {
        assert_eq!(Dataset::new(vec![1.0]), Err(Error::EmptyInput));
        assert!(matches!(
            Dataset::new(vec![1.0, f64::NAN]),
            Err(Error::InvalidValue { index: 1, .. })
        ));
        assert!(matches!(
            Dataset::new(vec![1.0, 3e9]),
            Err(Error::InvalidValue { index: 1, .. })
        ));
    }

    #[test]
    fn variance_two_points() {
        let (v, sigma) = variance_std(&dataset(&[0.0, 1.0])).unwrap();
        assert_eq!(v, fq(0.5)); // exact: 1/1 - 1/2
        assert!((sigma.decode() - 0.5f64.sqrt()).abs() <= 3.8e-9);
    }

    #[test]
    fn variance_degenerate() {
        assert_eq!(
            variance_std(&dataset(&[3.25, 3.25, 3.25])),
            Err(Error::DegenerateData)
        );
    }

    #[test]
    fn variance_toy_dataset() {
        // binary64 oracle of the Step I formula
        let n = TOY.len() as f64;
        let s: f64 = TOY.iter().sum();
        let s2: f64 = TOY.iter().map(|x| x * x).sum();
        let v_ref = s2 / (n - 1.0) - s * s / (n * (n - 1.0));
        assert!((v_ref - 1.3655357142857142).abs() < 1e-12);

        let (v, sigma) = variance_std(&dataset(&TOY)).unwrap();
        assert!((v.decode() - v_ref).abs() <= REL20);
        assert!((sigma.decode() - v_ref.sqrt()).abs() <= REL20);
    }

    #[test]
    fn standardize_two_point_sets() {
        // Step I uses the n-1 denominator, so sigma({-1,1}) = sqrt(2)
        let std = standardize(&dataset(&[-1.0, 1.0])).unwrap();
        assert_eq!(std.mu, FixedQ::ZERO);
        assert!((std.sigma.decode() - 2f64.sqrt()).abs() <= 1e-8);
        assert!((std.z[0].decode() + 1.0 / 2f64.sqrt()).abs() <= 1e-8);
        assert!((std.z[1].decode() - 1.0 / 2f64.sqrt()).abs() <= 1e-8);

        let std = standardize(&dataset(&[0.0, 2.0])).unwrap();
        assert_eq!(std.mu, FixedQ::ONE);
        assert!((std.sigma.decode() - 2f64.sqrt()).abs() <= 1e-8);
    }

    #[test]
    fn standardized_moments() {
        let std = standardize(&dataset(&TOY)).unwrap();
        let n = std.z.len() as f64;
        let mean: f64 = std.z.iter().map(|z| z.decode()).sum::<f64>() / n;
        let var: f64 = std.z.iter().map(|z| z.decode().powi(2)).sum::<f64>() / (n - 1.0)
            - mean * mean * n / (n - 1.0);
        assert!(mean.abs() <= REL20, "z mean {mean:e}");
        assert!((var.sqrt() - 1.0).abs() <= REL20, "z std {}", var.sqrt());
    }

    #[test]
    fn kernel_constants_within_one_ulp() {
        let c = KernelConstants::standard();
        let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let ulp = 1.0 / 4294967296.0;
        assert!((c.k6_at_0.decode() + 15.0 / sqrt_2pi).abs() <= ulp);
        assert!((c.k4_at_0.decode() - 3.0 / sqrt_2pi).abs() <= ulp);
        assert_eq!(c.mu2, FixedQ::ONE);
        assert!((c.r_k.decode() - 0.5 / sqrt_pi).abs() <= ulp);
        assert!((c.psi8_ns_std.decode() - 1.8512471).abs() <= 1e-6);
    }

    #[test]
    fn g1_matches_oracle_at_n_100() {
        let g1 = g1_bandwidth(100).unwrap().decode();
        let psi8 = 105.0 / (32.0 * std::f64::consts::PI.sqrt());
        let expect =
            (30.0 / (2.0 * std::f64::consts::PI).sqrt() / (psi8 * 100.0)).powf(1.0 / 9.0);
        assert!((g1 - expect).abs() <= REL20);
        assert!((g1 - 0.7376).abs() < 1e-4);
    }

    #[test]
    fn g1_power_law_scaling() {
        let a = g1_bandwidth(100).unwrap().decode();
        let b = g1_bandwidth(400).unwrap().decode();
        let expect = 4f64.powf(-1.0 / 9.0);
        assert!((b / a - expect).abs() <= REL20);
    }

    #[test]
    fn k6_known_values() {
        for impl_ in [ExpImpl::Cordic, ExpImpl::Remez] {
            let at0 = k6(FixedQ::ZERO, impl_).unwrap().decode();
            assert!((at0 - k6_ref(0.0)).abs() <= ABS24);
            assert!((at0 + 5.98413421).abs() <= ABS24);
            let at1 = k6(FixedQ::ONE, impl_).unwrap().decode();
            assert!((at1 - k6_ref(1.0)).abs() <= ABS24);
            assert!((at1 - 3.8715315923).abs() <= ABS24); // 16 e^-1/2 / sqrt(2 pi)
        }
    }

    #[test]
    fn k4_known_values() {
        for impl_ in [ExpImpl::Cordic, ExpImpl::Remez] {
            let at0 = k4(FixedQ::ZERO, impl_).unwrap().decode();
            assert!((at0 - 1.19682684).abs() <= ABS24);
            let at1 = k4(FixedQ::ONE, impl_).unwrap().decode();
            assert!((at1 - k4_ref(1.0)).abs() <= ABS24);
            assert!((at1 + 0.48394145).abs() <= ABS24);
        }
    }

    #[test]
    fn kernels_are_even_bit_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let x = fq(rng.gen_range(-20.0..20.0));
            let neg = x.neg().unwrap();
            for impl_ in [ExpImpl::Cordic, ExpImpl::Remez] {
                assert_eq!(k6(x, impl_).unwrap(), k6(neg, impl_).unwrap());
                assert_eq!(k4(x, impl_).unwrap(), k4(neg, impl_).unwrap());
            }
        }
    }

    #[test]
    fn psi6_two_point_oracle() {
        // n=2, Z={-1,1}, g1=2: psi6 = (2 K6(1) + 2 K6(0)) / (4 * 2^7)
        let z = StandardizedDataset {
            z: vec![fq(-1.0), fq(1.0)],
            mu: FixedQ::ZERO,
            sigma: FixedQ::ONE,
        };
        let expect = (2.0 * k6_ref(1.0) + 2.0 * k6_ref(0.0)) / (4.0 * 128.0);
        assert!(expect < 0.0);
        for strategy in Strategy::ALL {
            let got = psi6(&z, fq(2.0), strategy).unwrap().decode();
            assert!(
                (got - expect).abs() <= expect.abs() * REL20,
                "{strategy}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn psi6_identical_points() {
        // all differences zero: psi6 = K6(0) / g^7
        let z = StandardizedDataset {
            z: vec![fq(0.75); 5],
            mu: FixedQ::ZERO,
            sigma: FixedQ::ONE,
        };
        let expect = k6_ref(0.0) / 1.25f64.powi(7);
        let got = psi6(&z, fq(1.25), Strategy::Minimal).unwrap().decode();
        assert!((got - expect).abs() <= expect.abs() * REL20);
    }

    #[test]
    fn psi4_two_point_oracle() {
        let z = StandardizedDataset {
            z: vec![fq(-1.0), fq(1.0)],
            mu: FixedQ::ZERO,
            sigma: FixedQ::ONE,
        };
        let expect = (2.0 * k4_ref(1.0) + 2.0 * k4_ref(0.0)) / (4.0 * 32.0);
        for strategy in Strategy::ALL {
            let got = psi4(&z, fq(2.0), strategy).unwrap().decode();
            assert!((got - expect).abs() <= expect.abs() * REL20);
        }
    }

    // Naive full double sum (both orders of every pair plus the diagonal),
    // built from the same per-term datapath ops. Test-only oracle for the
    // symmetry-halved production path.
    fn psi_naive(z: &[FixedQ], g: FixedQ, strategy: Strategy, sixth: bool) -> FixedQ {
        let exp_impl = strategy.exp_impl();
        let rg = g.reciprocal().unwrap();
        let mut acc: i128 = 0;
        for i in 0..z.len() {
            for j in 0..z.len() {
                let d = match strategy {
                    Strategy::Literal => z[i].sub(z[j]).unwrap().div(g).unwrap(),
                    _ => z[i].add(z[j].neg().unwrap()).unwrap().mul(rg).unwrap(),
                };
                let term = if sixth {
                    k6(d, exp_impl).unwrap()
                } else {
                    k4(d, exp_impl).unwrap()
                };
                acc += term.raw() as i128;
            }
        }
        let n = FixedQ::from_int(z.len() as i64).unwrap();
        let power = if sixth { 7 } else { 5 };
        let denom = n.mul(n).unwrap().mul(pow_uint(g, power).unwrap()).unwrap();
        FixedQ::from_raw(i64::try_from(acc).unwrap())
            .div(denom)
            .unwrap()
    }

    #[test]
    fn halved_sum_matches_naive_sum() {
        let data = normal_sample(64, 42);
        let std = standardize(&data).unwrap();
        let g = g1_bandwidth(64).unwrap();
        for strategy in Strategy::ALL {
            let halved = psi6(&std, g, strategy).unwrap().decode();
            let naive = psi_naive(&std.z, g, strategy, true).decode();
            assert!(
                ((halved - naive) / naive).abs() <= REL20,
                "{strategy}: halved {halved} vs naive {naive}"
            );
        }
    }

    #[test]
    fn g2_unit_argument() {
        // psi6 = -3/sqrt(2 pi), n = 2 makes the root argument exactly 1
        let psi6 = fq(-3.0 / (2.0 * std::f64::consts::PI).sqrt());
        let g2 = g2_bandwidth(psi6, 2).unwrap().decode();
        assert!((g2 - 1.0).abs() <= 1e-8, "g2 = {g2}");
    }

    #[test]
    fn g2_power_law() {
        let a = g2_bandwidth(fq(-0.37), 128).unwrap().decode();
        let b = g2_bandwidth(fq(-0.185), 128).unwrap().decode();
        assert!((b / a - 2f64.powf(1.0 / 7.0)).abs() <= REL20);
    }

    #[test]
    fn g2_rejects_non_negative_psi6() {
        assert!(matches!(g2_bandwidth(fq(0.1), 128), Err(Error::Domain(_))));
        assert!(matches!(
            g2_bandwidth(FixedQ::ZERO, 128),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn bandwidth_toy_dataset_sane() {
        let data = dataset(&TOY);
        for strategy in Strategy::ALL {
            let r = bandwidth(&data, strategy).unwrap();
            assert!(r.h_final.raw() > 0);
            assert!(r.g1.raw() > 0 && r.g2.raw() > 0);
            assert!(r.psi6.raw() < 0 && r.psi4.raw() > 0);
            assert_eq!(r.h_final, r.h_std.mul(r.sigma_hat).unwrap());
            assert_eq!(r.strategy, strategy);
        }
    }

    #[test]
    fn literal_and_minimal_are_bit_identical() {
        // same op sequence; literal only recomputes the reciprocal
        let data = normal_sample(48, 5);
        let a = bandwidth(&data, Strategy::Literal).unwrap();
        let b = bandwidth(&data, Strategy::Minimal).unwrap();
        assert_eq!(a.h_final.raw(), b.h_final.raw());
        assert_eq!(a.psi6.raw(), b.psi6.raw());
        assert_eq!(a.psi4.raw(), b.psi4.raw());
    }

    #[test]
    fn strategies_mutually_agree() {
        let data = normal_sample(96, 11);
        let results: Vec<f64> = Strategy::ALL
            .iter()
            .map(|&s| bandwidth(&data, s).unwrap().h_final.decode())
            .collect();
        for w in results.windows(2) {
            assert!(((w[0] - w[1]) / w[0]).abs() <= 1e-5);
        }
    }

    #[test]
    fn bandwidth_is_deterministic_across_threads() {
        let data = normal_sample(64, 3);
        let base = bandwidth(&data, Strategy::Fast).unwrap();
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let d = data.clone();
                std::thread::spawn(move || bandwidth(&d, Strategy::Fast).unwrap())
            })
            .collect();
        for h in handles {
            let r = h.join().unwrap();
            assert_eq!(r.h_final.raw(), base.h_final.raw());
            assert_eq!(r.psi6.raw(), base.psi6.raw());
            assert_eq!(r.g2.raw(), base.g2.raw());
        }
    }

    #[test]
    fn scale_and_shift_behavior() {
        let data = normal_sample(64, 9);
        let h = bandwidth(&data, Strategy::Fast).unwrap().h_final.decode();
        for c in [0.5, 3.0, 10.0] {
            let scaled = Dataset::new(data.values().iter().map(|x| x * c).collect()).unwrap();
            let hc = bandwidth(&scaled, Strategy::Fast).unwrap().h_final.decode();
            assert!(((hc - c * h) / (c * h)).abs() <= 1e-5, "scale {c}");

            let shifted = Dataset::new(data.values().iter().map(|x| x + c).collect()).unwrap();
            let hs = bandwidth(&shifted, Strategy::Fast).unwrap().h_final.decode();
            assert!(((hs - h) / h).abs() <= 1e-5, "shift {c}");
        }
    }

    #[test]
    fn serde_round_trip_is_raw_exact() {
        let r = bandwidth(&dataset(&TOY), Strategy::Fast).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: BandwidthResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back.h_final.raw(), r.h_final.raw());
        assert_eq!(back.v_hat.raw(), r.v_hat.raw());
        assert_eq!(back.psi6.raw(), r.psi6.raw());
        assert_eq!(back.strategy, r.strategy);
    }
}
