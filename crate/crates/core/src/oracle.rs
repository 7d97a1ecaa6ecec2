//! Binary64 reference implementation of the whole pipeline.
//!
//! This is the ground truth the fixed-point datapath is certified against.
//! It shares no code with the `FixedQ` path: plain binary64 arithmetic with
//! the platform exp/ln/pow. Functional sums are compensated (Neumaier) so
//! the naive and symmetry-halved routes agree to a few ulps regardless of
//! accumulation order; both routes are computed and retained.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plugin::{bandwidth, BandwidthResult, Dataset, Strategy};

/// Compensated (Neumaier) accumulator.
#[derive(Clone, Copy, Default)]
struct Kbn {
    sum: f64,
    c: f64,
}

impl Kbn {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.c
    }
}

fn sqrt_2pi() -> f64 {
    (2.0 * std::f64::consts::PI).sqrt()
}

fn k6_ref(x: f64) -> f64 {
    let u = x * x;
    (((u - 15.0) * u + 45.0) * u - 15.0) * (-0.5 * u).exp() / sqrt_2pi()
}

fn k4_ref(x: f64) -> f64 {
    let u = x * x;
    ((u - 6.0) * u + 3.0) * (-0.5 * u).exp() / sqrt_2pi()
}

/// Same intermediate roster as [`BandwidthResult`], in binary64, plus the
/// naive full-double-sum functionals kept alongside the halved ones.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub v_hat: f64,
    pub sigma_hat: f64,
    pub psi8: f64,
    pub g1: f64,
    pub psi6: f64,
    pub g2: f64,
    pub psi4: f64,
    pub h_std: f64,
    pub h_final: f64,
    /// Step IV as the full n^2 double sum (equals `psi6` up to rounding).
    pub psi6_naive: f64,
    /// Step VI as the full n^2 double sum (equals `psi4` up to rounding).
    pub psi4_naive: f64,
}

/// Halved functional sum: (2 sum_{i<j} K(d/g) + n K(0)) / (n^2 g^p).
fn psi_halved(z: &[f64], g: f64, kernel: fn(f64) -> f64, power: i32) -> f64 {
    let n = z.len() as f64;
    let mut s = Kbn::default();
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            s.add(kernel((z[i] - z[j]) / g));
        }
    }
    (2.0 * s.total() + n * kernel(0.0)) / (n * n * g.powi(power))
}

/// Naive functional sum over every ordered pair, diagonal included.
fn psi_naive(z: &[f64], g: f64, kernel: fn(f64) -> f64, power: i32) -> f64 {
    let n = z.len() as f64;
    let mut s = Kbn::default();
    for &zi in z {
        for &zj in z {
            s.add(kernel((zi - zj) / g));
        }
    }
    s.total() / (n * n * g.powi(power))
}

/// Binary64 evaluation of Steps I-VII with z-scoring and the final rescale.
pub fn oracle_bandwidth(data: &Dataset) -> Result<OracleResult> {
    let n = data.len() as f64;
    let mut sum = Kbn::default();
    let mut sum_sq = Kbn::default();
    for &x in data.values() {
        sum.add(x);
        sum_sq.add(x * x);
    }
    let (sum, sum_sq) = (sum.total(), sum_sq.total());

    let v_hat = sum_sq / (n - 1.0) - sum * sum / (n * (n - 1.0));
    if !(v_hat > 0.0) {
        return Err(Error::DegenerateData);
    }
    let sigma_hat = v_hat.sqrt();
    let mu = sum / n;
    let z: Vec<f64> = data.values().iter().map(|&x| (x - mu) / sigma_hat).collect();

    let psi8 = 105.0 / (32.0 * std::f64::consts::PI.sqrt());
    let g1 = (30.0 / sqrt_2pi() / (psi8 * n)).powf(1.0 / 9.0);

    let psi6 = psi_halved(&z, g1, k6_ref, 7);
    let psi6_naive = psi_naive(&z, g1, k6_ref, 7);
    if !(psi6 < 0.0) {
        return Err(Error::Domain(
            "psi6 estimate must be negative for the Step V root",
        ));
    }
    let g2 = (-2.0 * (3.0 / sqrt_2pi()) / (psi6 * n)).powf(1.0 / 7.0);

    let psi4 = psi_halved(&z, g2, k4_ref, 5);
    let psi4_naive = psi_naive(&z, g2, k4_ref, 5);
    if !(psi4 > 0.0) {
        return Err(Error::Domain(
            "psi4 estimate must be positive for the Step VII root",
        ));
    }

    let r_k = 0.5 / std::f64::consts::PI.sqrt();
    let h_std = (r_k / (psi4 * n)).powf(0.2);
    let h_final = h_std * sigma_hat;

    Ok(OracleResult {
        v_hat,
        sigma_hat,
        psi8,
        g1,
        psi6,
        g2,
        psi4,
        h_std,
        h_final,
        psi6_naive,
        psi4_naive,
    })
}

/// One intermediate of the accuracy report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepDelta {
    pub fixed: f64,
    pub reference: f64,
    /// |fixed - reference| / |reference| * 100
    pub delta_percent: f64,
}

fn delta_percent(fixed: f64, reference: f64) -> f64 {
    (fixed - reference).abs() / reference.abs() * 100.0
}

/// Relative-error report of the fixed-point pipeline against the oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub n: usize,
    pub strategy: Strategy,
    pub h_fixed: f64,
    pub h_ref: f64,
    /// |h_fixed - h_ref| / |h_ref| * 100
    pub delta_percent: f64,
    pub per_step: BTreeMap<String, StepDelta>,
}

/// Runs both pipelines and reports the per-step relative errors.
pub fn compare(data: &Dataset, strategy: Strategy) -> Result<CompareReport> {
    let fixed = bandwidth(data, strategy)?;
    let reference = oracle_bandwidth(data)?;
    Ok(build_report(data.len(), &fixed, &reference))
}

/// Assembles the report from already-computed results.
pub fn build_report(n: usize, fixed: &BandwidthResult, reference: &OracleResult) -> CompareReport {
    let mut per_step = BTreeMap::new();
    let mut put = |name: &str, f: f64, r: f64| {
        per_step.insert(
            name.to_owned(),
            StepDelta {
                fixed: f,
                reference: r,
                delta_percent: delta_percent(f, r),
            },
        );
    };
    put("v_hat", fixed.v_hat.decode(), reference.v_hat);
    put("sigma_hat", fixed.sigma_hat.decode(), reference.sigma_hat);
    put("psi8", fixed.psi8.decode(), reference.psi8);
    put("g1", fixed.g1.decode(), reference.g1);
    put("psi6", fixed.psi6.decode(), reference.psi6);
    put("g2", fixed.g2.decode(), reference.g2);
    put("psi4", fixed.psi4.decode(), reference.psi4);
    put("h_std", fixed.h_std.decode(), reference.h_std);
    put("h_final", fixed.h_final.decode(), reference.h_final);

    CompareReport {
        n,
        strategy: fixed.strategy,
        h_fixed: fixed.h_final.decode(),
        h_ref: reference.h_final,
        delta_percent: delta_percent(fixed.h_final.decode(), reference.h_final),
        per_step,
    }
}
