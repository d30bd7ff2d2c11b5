//! Named analytic densities, sampled on grids and normalized.

use std::str::FromStr;

use super::{Axis, GridDensity};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Uniform on `[-1, 1]^k`.
    UniformBox,
    /// Standard Gaussian in every coordinate.
    Gaussian,
    /// Standard Gaussian in the leading coordinates times uniform on `[-1, 1]` in the last.
    Product,
    /// Uniform on `{0 ≤ x ≤ y ≤ 1}` (two dimensions only).
    Triangle,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-box" | "uniform" => Ok(Preset::UniformBox),
            "gaussian" | "gauss" => Ok(Preset::Gaussian),
            "product" => Ok(Preset::Product),
            "triangle" => Ok(Preset::Triangle),
            other => Err(Error::Parse(format!(
                "unknown preset '{other}' (expected uniform-box, gaussian, product or triangle)"
            ))),
        }
    }
}

impl Preset {
    /// Samples the preset in `k` dimensions with `res` cells per axis.
    pub fn build(self, k: usize, res: usize) -> Result<GridDensity> {
        match self {
            Preset::UniformBox => uniform_box(&vec![Axis::centered(1.25, res)?; k], &vec![-1.0; k], &vec![1.0; k]),
            Preset::Gaussian => gaussian(&vec![Axis::centered(6.0, res)?; k], &vec![0.0; k], &vec![1.0; k]),
            Preset::Product => {
                let mut axes = vec![Axis::centered(6.0, res)?; k];
                axes[k - 1] = Axis::centered(1.25, res)?;
                let lead = k - 1;
                GridDensity::from_fn(axes, move |p| {
                    let q: f64 = p[..lead].iter().map(|x| x * x).sum();
                    if p[lead].abs() <= 1.0 {
                        (-0.5 * q).exp()
                    } else {
                        0.0
                    }
                })?
                .normalize()
            }
            Preset::Triangle => {
                if k != 2 {
                    return Err(Error::InvalidGrid("the triangle preset is two-dimensional".into()));
                }
                triangle(res)
            }
        }
    }
}

/// Uniform density on the box `[lo, hi]` (cells whose midpoint lies inside).
pub fn uniform_box(axes: &[Axis], lo: &[f64], hi: &[f64]) -> Result<GridDensity> {
    if lo.len() != axes.len() || hi.len() != axes.len() {
        return Err(Error::DimensionMismatch {
            expected: axes.len(),
            got: lo.len().min(hi.len()),
        });
    }
    let (lo, hi) = (lo.to_vec(), hi.to_vec());
    GridDensity::from_fn(axes.to_vec(), move |p| {
        let inside = p.iter().zip(&lo).zip(&hi).all(|((x, l), h)| x >= l && x <= h);
        if inside {
            1.0
        } else {
            0.0
        }
    })?
    .normalize()
}

/// Axis-aligned Gaussian with the given means and standard deviations,
/// truncated to the grid box and normalized there.
pub fn gaussian(axes: &[Axis], mean: &[f64], sigma: &[f64]) -> Result<GridDensity> {
    if mean.len() != axes.len() || sigma.len() != axes.len() {
        return Err(Error::DimensionMismatch {
            expected: axes.len(),
            got: mean.len().min(sigma.len()),
        });
    }
    if sigma.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::NonPositiveScale(sigma.iter().copied().fold(f64::INFINITY, f64::min)));
    }
    let (mean, sigma) = (mean.to_vec(), sigma.to_vec());
    GridDensity::from_fn(axes.to_vec(), move |p| {
        let q: f64 = p
            .iter()
            .zip(&mean)
            .zip(&sigma)
            .map(|((x, m), s)| ((x - m) / s).powi(2))
            .sum();
        (-0.5 * q).exp()
    })?
    .normalize()
}

/// Tensor product of one-dimensional densities.
pub fn product(factors: &[GridDensity]) -> Result<GridDensity> {
    let mut axes = Vec::new();
    for f in factors {
        axes.extend_from_slice(f.axes());
    }
    if axes.is_empty() {
        return Err(Error::InvalidGrid("product of no factors".into()));
    }
    let mut values = vec![1.0];
    for f in factors {
        let mut next = Vec::with_capacity(values.len() * f.len());
        for &a in &values {
            next.extend(f.values().iter().map(|b| a * b));
        }
        values = next;
    }
    GridDensity::new(axes, values)
}

/// Uniform density on `{0 ≤ x ≤ y ≤ 1}` on the grid `[0,1]²` (cells with `i ≤ j`).
pub fn triangle(res: usize) -> Result<GridDensity> {
    let a = Axis::new(0.0, 1.0, res)?;
    GridDensity::from_fn(vec![a, a], |p| if p[0] <= p[1] { 1.0 } else { 0.0 })?.normalize()
}
