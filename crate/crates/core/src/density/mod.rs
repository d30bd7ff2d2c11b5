//! Grid densities on boxes in `ℝ^k` and their entropy calculus.
//!
//! A [`GridDensity`] stores cell-midpoint samples in row-major order with the
//! last axis contiguous, so for group densities the `t`-lines are rows. All
//! integrals are midpoint sums. Interpolation treats the samples as nodal
//! values at midpoints with zero ghost nodes one cell outside the box, which
//! keeps every interpolant compactly supported.
//!
//! Axis indices in this module are 0-based.

mod io;
pub mod presets;
mod pushforward;
mod source;

pub use pushforward::{pushforward_entropy, ProjectionPlan};
pub use source::{mass_entropy, GridSource, ProceduralDensity};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::CorankGroup;
use crate::par;

/// Mass tolerance accepted by [`GridDensity::entropy`].
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// `y`-cells with marginal mass below this are treated as outside `supp f_Y`.
pub const CONDITIONAL_MASS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub res: usize,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, res: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidGrid(format!(
                "axis bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        if res == 0 {
            return Err(Error::InvalidGrid("axis resolution must be positive".into()));
        }
        Ok(Axis { lower, upper, res })
    }

    /// Symmetric axis `[-half, half]`.
    pub fn centered(half: f64, res: usize) -> Result<Self> {
        Axis::new(-half, half, res)
    }

    pub fn h(&self) -> f64 {
        (self.upper - self.lower) / self.res as f64
    }

    pub fn mid(&self, i: usize) -> f64 {
        self.lower + (i as f64 + 0.5) * self.h()
    }

    pub fn mids(&self) -> Vec<f64> {
        (0..self.res).map(|i| self.mid(i)).collect()
    }

    /// Largest `|midpoint|`.
    pub fn max_abs_mid(&self) -> f64 {
        self.mid(0).abs().max(self.mid(self.res - 1).abs())
    }

    /// Left node and weight for linear interpolation at `x`, or `None` where the
    /// interpolant vanishes. The node index may be `-1` (a ghost).
    pub fn lerp_index(&self, x: f64) -> Option<(isize, f64)> {
        let p = (x - self.lower) / self.h() - 0.5;
        if !(p > -1.0 && p < self.res as f64) {
            return None;
        }
        let i0 = p.floor();
        Some((i0 as isize, p - i0))
    }

    /// The same spacing extended by `cells` on both sides.
    pub fn extended(&self, cells: usize) -> Axis {
        let h = self.h();
        Axis {
            lower: self.lower - cells as f64 * h,
            upper: self.upper + cells as f64 * h,
            res: self.res + 2 * cells,
        }
    }

    /// Same spacing and resolution, bounds multiplied by `r`.
    pub fn scaled(&self, r: f64) -> Axis {
        Axis {
            lower: self.lower * r,
            upper: self.upper * r,
            res: self.res,
        }
    }
}

pub(crate) fn strides(axes: &[Axis]) -> Vec<usize> {
    let mut s = vec![1usize; axes.len()];
    for i in (0..axes.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * axes[i + 1].res;
    }
    s
}

pub(crate) fn unravel(mut idx: usize, axes: &[Axis], out: &mut [usize]) {
    for i in (0..axes.len()).rev() {
        out[i] = idx % axes[i].res;
        idx /= axes[i].res;
    }
}

fn plogp(v: f64) -> f64 {
    if v > 0.0 {
        v * v.ln()
    } else {
        0.0
    }
}

/// Result of [`GridDensity::conditional_entropy_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalProfile {
    /// Marginal density of the conditioning variables.
    pub f_y: GridDensity,
    /// `S(X | Y = y)` per `y`-cell, `None` outside the support of `f_Y`.
    pub profile: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    axes: Vec<Axis>,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("at least one axis required".into()));
        }
        for a in &axes {
            Axis::new(a.lower, a.upper, a.res)?;
        }
        let len: usize = axes.iter().map(|a| a.res).product();
        if values.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "values must be finite and nonnegative, found {v}"
            )));
        }
        Ok(GridDensity { axes, values })
    }

    /// Box `[lower, upper]` with `res` cells per axis, all values zero.
    pub fn zeros(axes: Vec<Axis>) -> Self {
        let len = axes.iter().map(|a| a.res).product();
        GridDensity {
            axes,
            values: vec![0.0; len],
        }
    }

    /// Samples `f` at the cell midpoints. Negative or non-finite samples are rejected.
    pub fn from_fn<F>(axes: Vec<Axis>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let src = ProceduralDensity::pointwise(axes, f)?;
        GridDensity::from_source(&src)
    }

    /// Materializes a streaming source.
    pub fn from_source<S: GridSource + ?Sized>(src: &S) -> Result<Self> {
        let axes = src.axes().to_vec();
        let mut g = GridDensity::zeros(axes);
        let row_len = g.row_len();
        par::for_each_row_mut(&mut g.values, row_len, |r, row| src.fill_row(r, row));
        GridDensity::new(g.axes, g.values)
    }

    pub(crate) fn from_parts_unchecked(axes: Vec<Axis>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), axes.iter().map(|a| a.res).product::<usize>());
        GridDensity { axes, values }
    }

    pub fn k(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lower(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.lower).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.upper).collect()
    }

    pub fn res(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.res).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.h()).product()
    }

    /// Largest cell side.
    pub fn max_h(&self) -> f64 {
        self.axes.iter().map(|a| a.h()).fold(0.0, f64::max)
    }

    pub fn row_len(&self) -> usize {
        self.axes[self.k() - 1].res
    }

    pub fn n_rows(&self) -> usize {
        self.len() / self.row_len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let n = self.row_len();
        &self.values[r * n..(r + 1) * n]
    }

    /// Multi-index to flat index.
    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, a)| acc * a.res + i)
    }

    /// Midpoint coordinates of the cell with flat index `i`.
    pub fn midpoint(&self, i: usize) -> Vec<f64> {
        let mut idx = vec![0; self.k()];
        unravel(i, &self.axes, &mut idx);
        idx.iter().zip(&self.axes).map(|(&j, a)| a.mid(j)).collect()
    }

    /// Elementwise map producing a new density on the same grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridDensity::new(self.axes.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    pub fn total_mass(&self) -> f64 {
        let vals = &self.values;
        par::sum(vals.len(), |i| vals[i]) * self.cell_volume()
    }

    pub fn normalize(&self) -> Result<Self> {
        let m = self.total_mass();
        if !(m > 0.0) {
            return Err(Error::ZeroMass);
        }
        Ok(GridDensity::from_parts_unchecked(
            self.axes.clone(),
            self.values.iter().map(|v| v / m).collect(),
        ))
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= NORMALIZATION_TOL
    }

    fn require_normalized(&self) -> Result<()> {
        let mass = self.total_mass();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { mass });
        }
        Ok(())
    }

    /// `S(f) = ∫ f ln f` (with `0 ln 0 = 0`); `f` must have unit mass.
    pub fn entropy(&self) -> Result<f64> {
        self.require_normalized()?;
        Ok(self.plogp_sum() * self.cell_volume())
    }

    fn plogp_sum(&self) -> f64 {
        let vals = &self.values;
        par::sum(vals.len(), |i| plogp(vals[i]))
    }

    /// `(Σ |v|^p Δ)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let vals = &self.values;
        let s = par::sum(vals.len(), |i| vals[i].powf(p)) * self.cell_volume();
        s.powf(1.0 / p)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Multilinear interpolant at `point`; zero outside the ghost layer.
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.k());
        let k = self.k();
        let mut base = Vec::with_capacity(k);
        for (x, a) in point.iter().zip(&self.axes) {
            match a.lerp_index(*x) {
                Some(p) => base.push(p),
                None => return 0.0,
            }
        }
        let st = strides(&self.axes);
        let mut total = 0.0;
        'corner: for corner in 0..(1usize << k) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for (i, ((i0, frac), a)) in base.iter().zip(&self.axes).enumerate() {
                let up = (corner >> i) & 1 == 1;
                let idx = if up { i0 + 1 } else { *i0 };
                if idx < 0 || idx as usize >= a.res {
                    continue 'corner;
                }
                w *= if up { *frac } else { 1.0 - frac };
                flat += idx as usize * st[i];
            }
            if w != 0.0 {
                total += w * self.values[flat];
            }
        }
        total
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        if axes.is_empty() {
            return Err(Error::InvalidAxes("axis set must be nonempty".into()));
        }
        let mut seen = vec![false; self.k()];
        for &a in axes {
            if a >= self.k() || seen[a] {
                return Err(Error::InvalidAxes(format!(
                    "{axes:?} is not a set of distinct axes of a {}-dimensional grid",
                    self.k()
                )));
            }
            seen[a] = true;
        }
        Ok(())
    }

    /// Integrates out every axis not in `kept` (kept axes keep their order).
    pub fn marginal(&self, kept: &[usize]) -> Result<Self> {
        self.check_axes(kept)?;
        let mut kept = kept.to_vec();
        kept.sort_unstable();
        let out_axes: Vec<Axis> = kept.iter().map(|&a| self.axes[a]).collect();
        let dropped_vol: f64 = (0..self.k())
            .filter(|a| !kept.contains(a))
            .map(|a| self.axes[a].h())
            .product();
        let st = strides(&self.axes);
        let out_st = strides(&out_axes);
        // the output index is Σ idx[kept[i]] * out_st[i]; accumulate per input cell
        let mut out = vec![0.0; out_axes.iter().map(|a| a.res).product()];
        let mut idx = vec![0usize; self.k()];
        for (flat, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let mut rem = flat;
            for a in 0..self.k() {
                idx[a] = rem / st[a];
                rem %= st[a];
            }
            let o: usize = kept.iter().zip(&out_st).map(|(&a, s)| idx[a] * s).sum();
            out[o] += v;
        }
        for v in &mut out {
            *v *= dropped_vol;
        }
        Ok(GridDensity::from_parts_unchecked(out_axes, out))
    }

    /// Pushforward under deletion of `deleted` (the maps `P_j`, `P_{i,j}`).
    pub fn coordinate_pushforward(&self, deleted: &[usize]) -> Result<Self> {
        self.check_axes(deleted)?;
        let kept: Vec<usize> = (0..self.k()).filter(|a| !deleted.contains(a)).collect();
        if kept.is_empty() {
            return Err(Error::InvalidAxes("cannot delete every axis".into()));
        }
        self.marginal(&kept)
    }

    /// Density of `(π_j)_#(f dm)` for a density on `ℝ^{d+2n+1}` with `t` last.
    ///
    /// For the paired projections each `t`-line is shifted by the shear
    /// `±(α/2) x_{d+2i-1} x_{d+2i}` with linear interpolation and then summed over
    /// the deleted coordinate. The output `s`-axis keeps the input spacing and
    /// is extended to contain the sheared support, so no mass is lost.
    pub fn corank_pushforward(&self, g: &CorankGroup, j: usize) -> Result<Self> {
        let plan = ProjectionPlan::new(g, j, &self.axes)?;
        plan.materialize(self)
    }

    /// Splits the axes into `X = x_axes` and `Y = complement` and returns
    /// `f_Y` together with `S(X | Y = y)` per `y`-cell.
    pub fn conditional_entropy_profile(&self, x_axes: &[usize]) -> Result<ConditionalProfile> {
        self.require_normalized()?;
        self.check_axes(x_axes)?;
        let y_axes: Vec<usize> = (0..self.k()).filter(|a| !x_axes.contains(a)).collect();
        if y_axes.is_empty() {
            return Err(Error::InvalidAxes("conditioning set is empty".into()));
        }
        let y_grid = self.marginal(&y_axes)?;
        let dx: f64 = x_axes.iter().map(|&a| self.axes[a].h()).product();

        let st = strides(&self.axes);
        let y_st = strides(y_grid.axes());
        let mut ent = vec![0.0; y_grid.len()];
        let mut idx = vec![0usize; self.k()];
        for (flat, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let mut rem = flat;
            for a in 0..self.k() {
                idx[a] = rem / st[a];
                rem %= st[a];
            }
            let o: usize = y_axes.iter().zip(&y_st).map(|(&a, s)| idx[a] * s).sum();
            ent[o] += plogp(v);
        }
        let profile = ent
            .iter()
            .zip(y_grid.values())
            .map(|(&e, &fy)| {
                // ∫ (v/fy) ln(v/fy) dx = (Σ v ln v) dx / fy − ln fy, using Σ v dx = fy
                (fy >= CONDITIONAL_MASS_FLOOR).then(|| e * dx / fy - fy.ln())
            })
            .collect();
        Ok(ConditionalProfile {
            f_y: y_grid,
            profile,
        })
    }

    /// `|S(X,Y) − S(Y) − ∫ S(X|Y=y) f_Y(y) dy|`.
    pub fn chain_rule_residual(&self, x_axes: &[usize]) -> Result<f64> {
        let cp = self.conditional_entropy_profile(x_axes)?;
        let s_xy = self.entropy()?;
        let s_y = cp.f_y.entropy()?;
        let dy = cp.f_y.cell_volume();
        let integral: f64 = cp
            .profile
            .iter()
            .zip(cp.f_y.values())
            .filter_map(|(s, &fy)| s.map(|s| s * fy * dy))
            .sum();
        Ok((s_xy - s_y - integral).abs())
    }

    /// `S(f) + ln ∫ e^φ − ∫ f φ`, nonnegative by the Gibbs inequality.
    ///
    /// `phi` holds one value per cell; `-∞` is allowed where `f = 0`.
    pub fn gibbs_gap(&self, phi: &[f64]) -> Result<f64> {
        if phi.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: phi.len(),
            });
        }
        let s = self.entropy()?;
        let vol = self.cell_volume();
        let m = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return Err(Error::InvalidGrid("potential must be finite somewhere".into()));
        }
        let lse = m + (phi.iter().map(|p| (p - m).exp()).sum::<f64>() * vol).ln();
        let mut fphi = 0.0;
        for (&v, &p) in self.values.iter().zip(phi) {
            if v > 0.0 {
                if !p.is_finite() {
                    return Ok(f64::INFINITY);
                }
                fphi += v * p;
            }
        }
        Ok(s + lse - fphi * vol)
    }

    /// The rescaled density `r^{-Q} f∘δ_{1/r}`; `f` lives on `ℝ^{d+2n+1}` with `t` last.
    ///
    /// On grids this is exact: the `x` axes stretch by `r`, the `t` axis by `r²`.
    pub fn dilate(&self, g: &CorankGroup, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveScale(r));
        }
        if self.k() != g.topo_dim() {
            return Err(Error::DimensionMismatch {
                expected: g.topo_dim(),
                got: self.k(),
            });
        }
        let k = self.k();
        let axes = self
            .axes
            .iter()
            .enumerate()
            .map(|(i, a)| if i + 1 == k { a.scaled(r * r) } else { a.scaled(r) })
            .collect();
        let c = r.powi(-(g.homogeneous_dim() as i32));
        Ok(GridDensity::from_parts_unchecked(
            axes,
            self.values.iter().map(|v| c * v).collect(),
        ))
    }

    /// Fraction of the mass carried by the outermost layer of cells.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let total: f64 = self.values.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut idx = vec![0usize; self.k()];
        let mut edge = 0.0;
        for (flat, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            unravel(flat, &self.axes, &mut idx);
            if idx.iter().zip(&self.axes).any(|(&i, a)| i == 0 || i + 1 == a.res) {
                edge += v;
            }
        }
        edge / total
    }
}

#[cfg(test)]
mod tests;
