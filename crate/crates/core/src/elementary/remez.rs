//! Remez exchange generator for minimax polynomial approximations.
//!
//! Produces the coefficients embedded in the pipelined exponential unit.
//! The exchange runs in binary64: solve the linear system that forces an
//! alternating error of magnitude E at the current reference nodes, locate
//! the extrema of the true error curve, exchange, and stop once the extrema
//! magnitudes agree within 1% relative spread. The returned error bound is
//! then re-certified by dense sampling, never taken from the solve.

use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exchange iteration cap.
pub const MAX_EXCHANGE_ITERS: usize = 100;

/// Extrema magnitudes must agree within this relative spread to accept.
const EQUIOSCILLATION_SPREAD: f64 = 0.01;

/// Points used to certify the final error bound.
const CERTIFY_SAMPLES: usize = 100_001;

/// Function being approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RemezTarget {
    Exp,
}

impl RemezTarget {
    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            RemezTarget::Exp => x.exp(),
        }
    }
}

impl fmt::Display for RemezTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RemezTarget::Exp => f.write_str("exp"),
        }
    }
}

/// A minimax polynomial with its certification metadata.
///
/// Coefficients are low-order first, kept both as binary64 reals and as
/// round-to-nearest Q2.62 words (the format the datapath evaluates in).
#[derive(Debug, Clone, PartialEq)]
pub struct PolyApprox {
    pub target: RemezTarget,
    pub degree: usize,
    pub domain: [f64; 2],
    pub coefficients: Vec<f64>,
    pub coefficients_q62: Vec<i64>,
    pub certified_max_abs_error: f64,
}

impl PolyApprox {
    /// Horner evaluation of the binary64 coefficients.
    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coefficients, x)
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn q62(c: f64) -> Result<i64> {
    let scaled = (c * (1u64 << 62) as f64).round();
    if scaled >= 9.223372036854775808e18 || scaled <= -9.223372036854775808e18 {
        return Err(Error::Range(c));
    }
    Ok(scaled as i64)
}

/// Computes the minimax polynomial of `degree` for `target` on `domain`.
///
/// Degenerate point domains return the exact constant with zero error.
pub fn remez_minimax(target: RemezTarget, domain: [f64; 2], degree: usize) -> Result<PolyApprox> {
    let [lo, hi] = domain;
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::Domain("invalid approximation domain"));
    }
    if lo == hi {
        let c = target.eval(lo);
        return Ok(PolyApprox {
            target,
            degree: 0,
            domain,
            coefficients: vec![c],
            coefficients_q62: vec![q62(c)?],
            certified_max_abs_error: 0.0,
        });
    }

    let m = degree + 2;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    // Chebyshev-Lobatto initialization
    let mut nodes: Vec<f64> = (0..m)
        .map(|i| mid - half * (std::f64::consts::PI * i as f64 / (m - 1) as f64).cos())
        .collect();

    for _ in 0..MAX_EXCHANGE_ITERS {
        let coeffs = solve_alternating(&nodes, target, degree)?;
        let extrema = error_extrema(&coeffs, target, lo, hi, 256 * m);
        let refs = pick_alternating(extrema, m);
        if refs.len() < m {
            return Err(Error::Convergence(MAX_EXCHANGE_ITERS));
        }
        let max_e = refs.iter().fold(0.0f64, |a, p| a.max(p.1.abs()));
        let min_e = refs.iter().fold(f64::INFINITY, |a, p| a.min(p.1.abs()));
        nodes = refs.iter().map(|p| p.0).collect();
        if max_e - min_e <= EQUIOSCILLATION_SPREAD * max_e {
            let mut certified = 0.0f64;
            for i in 0..CERTIFY_SAMPLES {
                let x = lo + (hi - lo) * i as f64 / (CERTIFY_SAMPLES - 1) as f64;
                certified = certified.max((horner(&coeffs, x) - target.eval(x)).abs());
            }
            certified = certified.max(max_e);
            let coefficients_q62 = coeffs.iter().map(|&c| q62(c)).collect::<Result<_>>()?;
            return Ok(PolyApprox {
                target,
                degree,
                domain,
                coefficients: coeffs,
                coefficients_q62,
                certified_max_abs_error: certified,
            });
        }
    }
    Err(Error::Convergence(MAX_EXCHANGE_ITERS))
}

/// Solves p(x_i) + (-1)^i E = f(x_i) for the coefficients of p.
fn solve_alternating(nodes: &[f64], target: RemezTarget, degree: usize) -> Result<Vec<f64>> {
    let m = nodes.len();
    let mut a = vec![vec![0.0f64; m]; m];
    let mut b = vec![0.0f64; m];
    for (i, &x) in nodes.iter().enumerate() {
        let mut p = 1.0;
        for j in 0..=degree {
            a[i][j] = p;
            p *= x;
        }
        a[i][degree + 1] = if i % 2 == 0 { 1.0 } else { -1.0 };
        b[i] = target.eval(x);
    }
    let sol = gauss_solve(&mut a, &mut b)?;
    Ok(sol[..=degree].to_vec())
}

/// Gaussian elimination with partial pivoting.
fn gauss_solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return Err(Error::Domain("singular system in Remez exchange"));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in (row + 1)..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}

/// Local extrema of `p - f` on [lo, hi], endpoints included, golden-section
/// refined. Returned as (x, error) sorted by x.
fn error_extrema(
    coeffs: &[f64],
    target: RemezTarget,
    lo: f64,
    hi: f64,
    grid: usize,
) -> Vec<(f64, f64)> {
    let err = |x: f64| horner(coeffs, x) - target.eval(x);
    let at = |i: usize| lo + (hi - lo) * i as f64 / grid as f64;
    let vals: Vec<f64> = (0..=grid).map(|i| err(at(i))).collect();

    let mut out = vec![(lo, vals[0])];
    for i in 1..grid {
        let rising = vals[i] - vals[i - 1];
        let falling = vals[i + 1] - vals[i];
        if rising * falling <= 0.0 && (rising != 0.0 || falling != 0.0) {
            let (mut a, mut b) = (at(i - 1), at(i + 1));
            let maximizing = vals[i] >= vals[i - 1];
            for _ in 0..60 {
                let x1 = a + (b - a) * 0.381966011250105;
                let x2 = b - (b - a) * 0.381966011250105;
                let keep_right = if maximizing {
                    err(x1) < err(x2)
                } else {
                    err(x1) > err(x2)
                };
                if keep_right {
                    a = x1;
                } else {
                    b = x2;
                }
            }
            let x = 0.5 * (a + b);
            out.push((x, err(x)));
        }
    }
    out.push((hi, vals[grid]));
    out
}

/// Reduces extremum candidates to an alternating reference of size `m`:
/// same-sign runs keep their largest member, then the smaller end is
/// dropped until `m` remain.
fn pick_alternating(candidates: Vec<(f64, f64)>, m: usize) -> Vec<(f64, f64)> {
    let mut kept: Vec<(f64, f64)> = Vec::with_capacity(candidates.len());
    for (x, e) in candidates {
        match kept.last() {
            Some(&(_, prev)) if (prev >= 0.0) == (e >= 0.0) => {
                if e.abs() > prev.abs() {
                    *kept.last_mut().unwrap() = (x, e);
                }
            }
            _ => kept.push((x, e)),
        }
    }
    while kept.len() > m {
        if kept.first().unwrap().1.abs() <= kept.last().unwrap().1.abs() {
            kept.remove(0);
        } else {
            kept.pop();
        }
    }
    kept
}

/// Scans the error curve of a finished approximation and returns its local
/// extrema (x, error) with same-sign runs merged, endpoints included.
/// Re-verification hook for equioscillation checks: consecutive entries
/// alternate in sign by construction, so callers only need to check count
/// and magnitude.
pub fn scan_error_extrema(poly: &PolyApprox, samples: usize) -> Vec<(f64, f64)> {
    let raw = error_extrema(
        &poly.coefficients,
        poly.target,
        poly.domain[0],
        poly.domain[1],
        samples,
    );
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (x, e) in raw {
        match merged.last() {
            Some(&(_, prev)) if (prev >= 0.0) == (e >= 0.0) => {
                if e.abs() > prev.abs() {
                    *merged.last_mut().unwrap() = (x, e);
                }
            }
            _ => merged.push((x, e)),
        }
    }
    merged
}

/// Serialized form carries coefficients as exact decimal strings plus the
/// raw Q2.62 words, matching the `remez-gen` interface.
impl Serialize for PolyApprox {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Coeff<'a> {
            decimal: &'a str,
            raw_q62: i64,
        }
        let decimals: Vec<String> = self.coefficients.iter().map(|c| format!("{c:.17e}")).collect();
        let coefficients: Vec<Coeff> = decimals
            .iter()
            .zip(&self.coefficients_q62)
            .map(|(d, &raw)| Coeff {
                decimal: d,
                raw_q62: raw,
            })
            .collect();
        let mut st = serializer.serialize_struct("PolyApprox", 5)?;
        st.serialize_field("target", &self.target)?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("domain", &self.domain)?;
        st.serialize_field("coefficients", &coefficients)?;
        st.serialize_field("certified_max_abs_error", &self.certified_max_abs_error)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PolyApprox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Coeff {
            decimal: String,
            raw_q62: i64,
        }
        #[derive(Deserialize)]
        struct Repr {
            target: RemezTarget,
            degree: usize,
            domain: [f64; 2],
            coefficients: Vec<Coeff>,
            certified_max_abs_error: f64,
        }
        let r = Repr::deserialize(deserializer)?;
        let mut coefficients = Vec::with_capacity(r.coefficients.len());
        let mut coefficients_q62 = Vec::with_capacity(r.coefficients.len());
        for c in r.coefficients {
            coefficients.push(c.decimal.parse::<f64>().map_err(D::Error::custom)?);
            coefficients_q62.push(c.raw_q62);
        }
        Ok(PolyApprox {
            target: r.target,
            degree: r.degree,
            domain: r.domain,
            coefficients,
            coefficients_q62,
            certified_max_abs_error: r.certified_max_abs_error,
        })
    }
}
