use super::{plogp, strides, Axis, GridDensity, GridSource};
use crate::error::{Error, Result};
use crate::group::{CorankGroup, ProjectionKind};
use crate::par;

/// Adds `weight ·` (input line shifted by `delta` cells) into `out`.
///
/// `out` uses the input spacing with `ext` extra cells on each side, and the
/// input is read as a piecewise-linear interpolant between midpoints with zero
/// ghosts, so the shifted copy keeps its mass exactly. Needs `ext ≥ |delta| + 1`.
pub(crate) fn add_shifted(out: &mut [f64], input: &[f64], ext: usize, delta: f64, weight: f64) {
    // out[m] = (1-w) v[m - ext + f] + w v[m - ext + f + 1] with f = floor(-delta)
    let f = (-delta).floor();
    let w = -delta - f;
    let base = ext as isize - f as isize;
    let lo = (1.0 - w) * weight;
    let hi = w * weight;
    let b = base as usize;
    if w == 0.0 {
        debug_assert!(base >= 0 && b + input.len() <= out.len());
        for (o, &v) in out[b..].iter_mut().zip(input) {
            *o += lo * v;
        }
        return;
    }
    debug_assert!(base >= 1 && b + input.len() <= out.len());
    for (i, &v) in input.iter().enumerate() {
        if v != 0.0 {
            out[i + b] += lo * v;
            out[i + b - 1] += hi * v;
        }
    }
}

/// Geometry of one projection `π_j` acting on a grid over `ℝ^{d+2n+1}`.
#[derive(Debug, Clone)]
pub struct ProjectionPlan {
    kind: ProjectionKind,
    in_axes: Vec<Axis>,
    out_axes: Vec<Axis>,
    /// Extra `s` cells on each side of the `t` range.
    ext: usize,
    /// Signed `±α/2` and the pair axes, for the sheared kinds.
    shear: Option<(f64, usize, usize)>,
}

impl ProjectionPlan {
    pub fn new(g: &CorankGroup, j: usize, in_axes: &[Axis]) -> Result<Self> {
        let k = g.topo_dim();
        if in_axes.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: in_axes.len(),
            });
        }
        let kind = g.projection_kind(j)?;
        let t_axis = in_axes[k - 1];
        let (out_axes, ext, shear) = match kind {
            ProjectionKind::Center => (in_axes[..k - 1].to_vec(), 0, None),
            ProjectionKind::Commuting { axis } => {
                let mut out: Vec<Axis> = in_axes[..k - 1].to_vec();
                out.remove(axis);
                out.push(t_axis);
                (out, 0, None)
            }
            ProjectionKind::PairFirst { pair, axis } | ProjectionKind::PairSecond { pair, axis } => {
                let (a, b) = g.pair_axes(pair);
                let sign = if matches!(kind, ProjectionKind::PairFirst { .. }) {
                    1.0
                } else {
                    -1.0
                };
                let half = 0.5 * g.alpha()[pair];
                let cmax = half * in_axes[a].max_abs_mid() * in_axes[b].max_abs_mid();
                let ext = (cmax / t_axis.h()).ceil() as usize + 1;
                let mut out: Vec<Axis> = in_axes[..k - 1].to_vec();
                out.remove(axis);
                out.push(t_axis.extended(ext));
                (out, ext, Some((sign * half, a, b)))
            }
        };
        Ok(ProjectionPlan {
            kind,
            in_axes: in_axes.to_vec(),
            out_axes,
            ext,
            shear,
        })
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    pub fn out_axes(&self) -> &[Axis] {
        &self.out_axes
    }

    pub fn out_len(&self) -> usize {
        self.out_axes.iter().map(|a| a.res).product()
    }

    pub fn out_row_len(&self) -> usize {
        self.out_axes[self.out_axes.len() - 1].res
    }

    pub fn out_rows(&self) -> usize {
        self.out_len() / self.out_row_len()
    }

    fn check_source<S: GridSource + ?Sized>(&self, src: &S) -> Result<()> {
        if src.axes() != self.in_axes.as_slice() {
            return Err(Error::InvalidGrid(
                "source axes differ from the planned axes".into(),
            ));
        }
        Ok(())
    }

    /// Computes output row `r` into `out` (zeroed first).
    pub fn compute_row<S: GridSource + ?Sized>(&self, src: &S, r: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let k = self.in_axes.len();
        let t = self.in_axes[k - 1];
        let mut buf = Vec::new();
        match self.kind {
            ProjectionKind::Center => {
                let n = self.out_row_len();
                for (i, o) in out.iter_mut().enumerate() {
                    let row = src.row(r * n + i, &mut buf);
                    *o = row.iter().sum::<f64>() * t.h();
                }
            }
            _ => {
                let axis = self.kind.deleted_axis().expect("non-center kind");
                let lead_in = &self.in_axes[..k - 1];
                let lead_out = &self.out_axes[..self.out_axes.len() - 1];
                let in_st = strides(lead_in);
                // multi-index of the kept x coordinates
                let mut idx = vec![0usize; lead_in.len()];
                let kept: Vec<usize> = (0..lead_in.len()).filter(|&i| i != axis).collect();
                let mut rem = r;
                for (pos, &i) in kept.iter().enumerate().rev() {
                    idx[i] = rem % lead_out[pos].res;
                    rem /= lead_out[pos].res;
                }
                let base: usize = idx.iter().zip(&in_st).map(|(i, s)| i * s).sum();
                let del = self.in_axes[axis];
                let h = del.h();
                for ia in 0..del.res {
                    let row = src.row(base + ia * in_st[axis], &mut buf);
                    let delta = match self.shear {
                        Some((c, a, b)) => {
                            let xa = if a == axis { del.mid(ia) } else { self.in_axes[a].mid(idx[a]) };
                            let xb = if b == axis { del.mid(ia) } else { self.in_axes[b].mid(idx[b]) };
                            c * xa * xb / t.h()
                        }
                        None => 0.0,
                    };
                    add_shifted(out, row, self.ext, delta, h);
                }
            }
        }
    }

    /// The pushforward as a stored grid.
    pub fn materialize<S: GridSource + ?Sized>(&self, src: &S) -> Result<GridDensity> {
        self.check_source(src)?;
        let mut values = vec![0.0; self.out_len()];
        par::for_each_row_mut(&mut values, self.out_row_len(), |r, row| {
            self.compute_row(src, r, row)
        });
        Ok(GridDensity::from_parts_unchecked(self.out_axes.clone(), values))
    }
}

/// `(mass, S)` of the normalized pushforward `π_j` of a streaming source,
/// without storing the output grid.
pub fn pushforward_entropy<S: GridSource + ?Sized>(
    g: &CorankGroup,
    j: usize,
    src: &S,
) -> Result<(f64, f64)> {
    let plan = ProjectionPlan::new(g, j, src.axes())?;
    plan.check_source(src)?;
    let n = plan.out_row_len();
    let sums = par::sum_vec_chunked(plan.out_rows(), 2, 1, |r, acc| {
        let mut row = vec![0.0; n];
        plan.compute_row(src, r, &mut row);
        for &v in &row {
            acc[0] += v;
            acc[1] += plogp(v);
        }
    });
    let vol: f64 = plan.out_axes.iter().map(|a| a.h()).product();
    let mass = sums[0] * vol;
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok((mass, sums[1] * vol / mass - mass.ln()))
}
