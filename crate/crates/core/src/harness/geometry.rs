//! Pullbacks `f_j ∘ π_j` and tensor-grid quadrature of their products.

use crate::density::{Axis, GridDensity, GridSource};
use crate::error::{Error, Result};
use crate::group::{CorankGroup, ProjectionKind};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) struct Spec {
    /// Deleted coordinate; `k − 1` means the projection onto the leading coordinates.
    pub(super) deleted: usize,
    /// `s = t + c·x_a·x_b`.
    pub(super) shear: Option<(f64, usize, usize)>,
}

/// A family of projections of `ℝ^k`, coordinates `(x_0, …, x_{k−2}, t)`.
///
/// Projection `j` (1-based) deletes one coordinate. Deleting an `x`
/// coordinate keeps `s = t + c·x_a·x_b`; deleting `t` returns `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    k: usize,
    specs: Vec<Spec>,
}

impl Geometry {
    /// The projections `π_1, …, π_{d+2n+1}` of `H(d, α)`.
    pub fn corank(g: &CorankGroup) -> Self {
        let k = g.topo_dim();
        let specs = (1..=g.num_projections())
            .map(|j| match g.projection_kind(j).expect("in range") {
                ProjectionKind::Center => Spec {
                    deleted: k - 1,
                    shear: None,
                },
                ProjectionKind::Commuting { axis } => Spec {
                    deleted: axis,
                    shear: None,
                },
                kind @ (ProjectionKind::PairFirst { pair, axis } | ProjectionKind::PairSecond { pair, axis }) => {
                    let (a, b) = g.pair_axes(pair);
                    let sign = if matches!(kind, ProjectionKind::PairFirst { .. }) {
                        1.0
                    } else {
                        -1.0
                    };
                    Spec {
                        deleted: axis,
                        shear: Some((sign * 0.5 * g.alpha()[pair], a, b)),
                    }
                }
            })
            .collect();
        Geometry { k, specs }
    }

    /// Coordinate deletions of `ℝ^k`.
    pub fn euclidean(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidAxes(format!("need k ≥ 2, got {k}")));
        }
        let specs = (0..k).map(|deleted| Spec { deleted, shear: None }).collect();
        Ok(Geometry { k, specs })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn num_projections(&self) -> usize {
        self.specs.len()
    }

    pub(super) fn spec(&self, j: usize) -> Result<Spec> {
        if j == 0 || j > self.specs.len() {
            return Err(Error::InvalidProjection {
                j,
                max: self.specs.len(),
            });
        }
        Ok(self.specs[j - 1])
    }

    pub(super) fn is_center(&self, s: Spec) -> bool {
        s.deleted == self.k - 1
    }

    /// `x` coordinates kept by a projection, in order.
    pub(super) fn kept(&self, s: Spec) -> Vec<usize> {
        (0..self.k - 1).filter(|&i| i != s.deleted).collect()
    }

    pub fn project(&self, j: usize, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: p.len(),
            });
        }
        let s = self.spec(j)?;
        let mut out: Vec<f64> = self.kept(s).iter().map(|&i| p[i]).collect();
        if !self.is_center(s) {
            let shift = s.shear.map_or(0.0, |(c, a, b)| c * p[a] * p[b]);
            out.push(p[self.k - 1] + shift);
        }
        Ok(out)
    }

    fn check_inputs(&self, js: &[usize], fs: &[GridDensity]) -> Result<Vec<Spec>> {
        if js.len() != fs.len() {
            return Err(Error::DimensionMismatch {
                expected: js.len(),
                got: fs.len(),
            });
        }
        js.iter()
            .zip(fs)
            .map(|(&j, f)| {
                if f.k() != self.k - 1 {
                    return Err(Error::DimensionMismatch {
                        expected: self.k - 1,
                        got: f.k(),
                    });
                }
                self.spec(j)
            })
            .collect()
    }
}

/// Tensor grid over `ℝ^k` on which products of pullbacks are sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub x_axes: Vec<Axis>,
    pub t_axis: Axis,
}

fn union_axis(axes: &[Axis]) -> Result<Axis> {
    let first = axes[0];
    if axes.iter().all(|a| *a == first) {
        return Ok(first);
    }
    let lo = axes.iter().map(|a| a.lower).fold(f64::INFINITY, f64::min);
    let hi = axes.iter().map(|a| a.upper).fold(f64::NEG_INFINITY, f64::max);
    let h = axes.iter().map(|a| a.h()).fold(f64::INFINITY, f64::min);
    Axis::new(lo, hi, ((hi - lo) / h).ceil() as usize)
}

impl Quadrature {
    pub fn axes(&self) -> Vec<Axis> {
        let mut a = self.x_axes.clone();
        a.push(self.t_axis);
        a
    }

    pub fn max_h(&self) -> f64 {
        self.axes().iter().map(|a| a.h()).fold(0.0, f64::max)
    }

    /// Smallest grid covering every pullback support.
    ///
    /// Each `x` axis is the common axis of the inputs keeping that coordinate
    /// (their union at the finest spacing if they differ). The `t` range is
    /// the set where every sheared input can be nonzero, using
    /// `|s − t| ≤ |c| max|x_a| max|x_b|`.
    pub fn covering(geom: &Geometry, js: &[usize], fs: &[GridDensity]) -> Result<Self> {
        let specs = geom.check_inputs(js, fs)?;
        let mut x_axes = Vec::with_capacity(geom.k - 1);
        for i in 0..geom.k - 1 {
            let cands: Vec<Axis> = specs
                .iter()
                .zip(fs)
                .filter_map(|(s, f)| geom.kept(*s).iter().position(|&c| c == i).map(|m| f.axes()[m]))
                .collect();
            if cands.is_empty() {
                return Err(Error::InvalidAxes(format!("no input covers coordinate {i}")));
            }
            x_axes.push(union_axis(&cands)?);
        }
        let sheared: Vec<(Axis, f64)> = specs
            .iter()
            .zip(fs)
            .filter(|(s, _)| !geom.is_center(**s))
            .map(|(s, f)| {
                let smax = s.shear.map_or(0.0, |(c, a, b)| {
                    c.abs() * x_axes[a].max_abs_mid() * x_axes[b].max_abs_mid()
                });
                (f.axes()[geom.k - 2], smax)
            })
            .collect();
        if sheared.is_empty() {
            return Err(Error::InvalidAxes("no input depends on the last coordinate".into()));
        }
        let s_axes: Vec<Axis> = sheared.iter().map(|p| p.0).collect();
        let base = union_axis(&s_axes)?;
        let smax = sheared.iter().map(|p| p.1).fold(0.0, f64::max);
        let t_axis = if smax == 0.0 {
            base
        } else {
            base.extended((smax / base.h()).ceil() as usize + 1)
        };
        Ok(Quadrature { x_axes, t_axis })
    }

    /// Errors if some input has support outside the grid.
    pub fn check_covers(&self, geom: &Geometry, js: &[usize], fs: &[GridDensity]) -> Result<()> {
        let need = Quadrature::covering(geom, js, fs)?;
        let inside = |outer: &Axis, inner: &Axis| {
            let tol = 1e-12 * (1.0 + inner.upper.abs() + inner.lower.abs());
            outer.lower <= inner.lower + tol && outer.upper >= inner.upper - tol
        };
        for (i, (a, b)) in self.x_axes.iter().zip(&need.x_axes).enumerate() {
            if !inside(a, b) {
                return Err(Error::SupportNotCovered(format!(
                    "coordinate {i}: grid [{}, {}] misses [{}, {}]",
                    a.lower, a.upper, b.lower, b.upper
                )));
            }
        }
        if self.x_axes.len() != need.x_axes.len() || !inside(&self.t_axis, &need.t_axis) {
            return Err(Error::SupportNotCovered(format!(
                "last coordinate: grid [{}, {}] misses [{}, {}]",
                self.t_axis.lower, self.t_axis.upper, need.t_axis.lower, need.t_axis.upper
            )));
        }
        Ok(())
    }
}

type Lerp = Option<(isize, f64)>;

/// `F(x, t) = ∏ f_j(π_j(x, t))` as a row source on a [`Quadrature`] grid,
/// each `f_j` read through its multilinear interpolant with zero ghosts.
pub struct PullbackProduct<'a> {
    k: usize,
    axes: Vec<Axis>,
    inputs: Vec<Input<'a>>,
}

struct Input<'a> {
    f: &'a GridDensity,
    center: bool,
    shear: Option<(f64, usize, usize)>,
    kept: Vec<usize>,
    /// For each axis of `f` over `x`, the interpolation weights at every quadrature node.
    tables: Vec<Vec<Lerp>>,
}

impl<'a> PullbackProduct<'a> {
    pub fn new(geom: &Geometry, js: &[usize], fs: &'a [GridDensity], quad: &Quadrature) -> Result<Self> {
        let specs = geom.check_inputs(js, fs)?;
        if quad.x_axes.len() != geom.k - 1 {
            return Err(Error::DimensionMismatch {
                expected: geom.k - 1,
                got: quad.x_axes.len(),
            });
        }
        let inputs = specs
            .iter()
            .zip(fs)
            .map(|(s, f)| {
                let kept = geom.kept(*s);
                let tables = kept
                    .iter()
                    .enumerate()
                    .map(|(m, &i)| {
                        let fa = f.axes()[m];
                        quad.x_axes[i].mids().iter().map(|&x| fa.lerp_index(x)).collect()
                    })
                    .collect();
                Input {
                    f,
                    center: geom.is_center(*s),
                    shear: s.shear,
                    kept,
                    tables,
                }
            })
            .collect();
        Ok(PullbackProduct {
            k: geom.k,
            axes: quad.axes(),
            inputs,
        })
    }

    /// Fills the `t` line at `x` node `idx`; returns false if it vanishes.
    fn line(&self, idx: &[usize], out: &mut [f64]) -> bool {
        let t_axis = self.axes[self.k - 1];
        let mut scalar = 1.0;
        let mut rows: Vec<(Vec<f64>, Axis, f64)> = Vec::new();
        let (mut tlo, mut thi) = (f64::NEG_INFINITY, f64::INFINITY);
        for inp in &self.inputs {
            let lerps: Option<Vec<(isize, f64)>> = inp
                .kept
                .iter()
                .zip(&inp.tables)
                .map(|(&i, tab)| tab[idx[i]])
                .collect();
            let Some(lerps) = lerps else {
                return false;
            };
            let fa = inp.f.axes();
            let n_lead = if inp.center { fa.len() } else { fa.len() - 1 };
            let row_len = if inp.center { 1 } else { fa[fa.len() - 1].res };
            let mut acc = vec![0.0; row_len];
            for mask in 0u32..(1 << n_lead) {
                let mut w = 1.0;
                let mut flat = 0usize;
                let mut ok = true;
                for (m, &(i0, wm)) in lerps.iter().enumerate() {
                    let bit = (mask >> m) & 1 == 1;
                    let i = i0 + bit as isize;
                    let wt = if bit { wm } else { 1.0 - wm };
                    if wt == 0.0 || i < 0 || i >= fa[m].res as isize {
                        ok = false;
                        break;
                    }
                    w *= wt;
                    flat = flat * fa[m].res + i as usize;
                }
                if !ok {
                    continue;
                }
                if inp.center {
                    acc[0] += w * inp.f.values()[flat];
                } else {
                    for (a, v) in acc.iter_mut().zip(inp.f.row(flat)) {
                        *a += w * v;
                    }
                }
            }
            if inp.center {
                scalar *= acc[0];
                if scalar == 0.0 {
                    return false;
                }
                continue;
            }
            let Some(first) = acc.iter().position(|v| *v != 0.0) else {
                return false;
            };
            let last = acc.iter().rposition(|v| *v != 0.0).unwrap();
            let sa = fa[fa.len() - 1];
            let shift = inp.shear.map_or(0.0, |(c, a, b)| {
                c * self.axes[a].mid(idx[a]) * self.axes[b].mid(idx[b])
            });
            tlo = tlo.max(sa.mid(first) - sa.h() - shift);
            thi = thi.min(sa.mid(last) + sa.h() - shift);
            rows.push((acc, sa, shift));
        }
        if tlo >= thi {
            return false;
        }
        let i0 = ((tlo - t_axis.lower) / t_axis.h() - 0.5).floor().max(0.0) as usize;
        let i1 = (((thi - t_axis.lower) / t_axis.h() - 0.5).ceil().max(0.0) as usize).min(t_axis.res);
        let mut any = false;
        for (i, o) in out.iter_mut().enumerate().take(i1).skip(i0) {
            let t = t_axis.mid(i);
            let mut v = scalar;
            for (row, sa, shift) in &rows {
                v *= lerp_row(row, sa, t + shift);
                if v == 0.0 {
                    break;
                }
            }
            *o = v;
            any |= v != 0.0;
        }
        any
    }

    fn unravel(&self, mut r: usize, idx: &mut [usize]) {
        for i in (0..self.k - 1).rev() {
            idx[i] = r % self.axes[i].res;
            r /= self.axes[i].res;
        }
    }

    /// `∫ F` by the midpoint rule on the quadrature grid.
    pub fn integral(&self) -> f64 {
        let n = self.n_rows();
        let len = self.axes[self.k - 1].res;
        let s = par::sum_chunked(n, 16, |r| {
            let mut idx = vec![0; self.k - 1];
            self.unravel(r, &mut idx);
            let mut out = vec![0.0; len];
            if self.line(&idx, &mut out) {
                out.iter().sum()
            } else {
                0.0
            }
        });
        s * self.cell_volume()
    }
}

#[inline]
fn lerp_row(row: &[f64], axis: &Axis, s: f64) -> f64 {
    let Some((i, w)) = axis.lerp_index(s) else {
        return 0.0;
    };
    let at = |i: isize| {
        if i < 0 || i as usize >= row.len() {
            0.0
        } else {
            row[i as usize]
        }
    };
    (1.0 - w) * at(i) + w * at(i + 1)
}

impl GridSource for PullbackProduct<'_> {
    fn axes(&self) -> &[Axis] {
        &self.axes
    }

    fn fill_row(&self, r: usize, out: &mut [f64]) {
        out.fill(0.0);
        let mut idx = vec![0; self.k - 1];
        self.unravel(r, &mut idx);
        self.line(&idx, out);
    }
}

/// `∫ ∏ f_j(π_j(x, t)) dx dt` over `H(d, α)` for `j = 1, …, d+2n` (and `d+2n+1`
/// when `include_last`), on the grid from [`Quadrature::covering`].
pub fn multilinear_lhs(g: &CorankGroup, fs: &[GridDensity], include_last: bool) -> Result<f64> {
    let m = g.horizontal_dim() + include_last as usize;
    if fs.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: fs.len(),
        });
    }
    let geom = Geometry::corank(g);
    let js: Vec<usize> = (1..=m).collect();
    let quad = Quadrature::covering(&geom, &js, fs)?;
    Ok(PullbackProduct::new(&geom, &js, fs, &quad)?.integral())
}
