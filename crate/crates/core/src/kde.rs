//! Gaussian kernel density estimation in binary64.
//!
//! A demo and validation surface: given a bandwidth (typically the PLUGIN
//! result), evaluate f_hat(x, h) = sum K((x - X_i)/h) / (n h) pointwise or
//! over a grid for external plotting. Not part of the modeled datapath.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::plugin::Dataset;

/// Densely evaluated KDE curve.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub h: f64,
    pub n: usize,
}

/// Grid for [`kde_curve`]; unset bounds default to [min X - 5h, max X + 5h].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lo: None,
            hi: None,
            points: 512,
        }
    }
}

/// Pointwise Gaussian KDE, f_hat(x, h) = sum K((x - X_i)/h) / (n h).
pub fn kde_eval(data: &Dataset, h: f64, x: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain("bandwidth must be positive"));
    }
    let mut s = 0.0f64;
    for &xi in data.values() {
        let u = (x - xi) / h;
        s += (-0.5 * u * u).exp();
    }
    Ok(s / ((2.0 * std::f64::consts::PI).sqrt() * data.len() as f64 * h))
}

/// Dense evaluation over an inclusive uniform grid.
pub fn kde_curve(data: &Dataset, h: f64, spec: &GridSpec) -> Result<KdeCurve> {
    if spec.points == 0 {
        return Err(Error::Domain("grid must contain at least one point"));
    }
    let min = data.values().iter().copied().fold(f64::INFINITY, f64::min);
    let max = data.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = spec.lo.unwrap_or(min - 5.0 * h);
    let hi = spec.hi.unwrap_or(max + 5.0 * h);
    if !(lo <= hi) {
        return Err(Error::Domain("grid bounds are inverted"));
    }

    let grid: Vec<f64> = if spec.points == 1 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..spec.points)
            .map(|i| lo + (hi - lo) * i as f64 / (spec.points - 1) as f64)
            .collect()
    };
    let density = grid
        .iter()
        .map(|&x| kde_eval(data, h, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(KdeCurve {
        grid,
        density,
        h,
        n: data.len(),
    })
}

impl KdeCurve {
    /// Trapezoidal mass of the curve; close to 1 on a wide enough grid.
    pub fn trapezoid_mass(&self) -> f64 {
        let mut mass = 0.0;
        for i in 1..self.grid.len() {
            mass += 0.5 * (self.density[i] + self.density[i - 1])
                * (self.grid[i] - self.grid[i - 1]);
        }
        mass
    }

    /// CSV export: `x,density` header, one row per grid point, 15
    /// significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,density")?;
        for (x, d) in self.grid.iter().zip(&self.density) {
            writeln!(w, "{x:.14e},{d:.14e}")?;
        }
        Ok(())
    }
}
