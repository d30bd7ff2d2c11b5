use super::{plogp, Axis, GridDensity};
use crate::error::{Error, Result};
use crate::par;

/// Row-wise access to grid samples without materializing the whole grid.
///
/// Row `r` is the line along the last axis at outer multi-index `r`
/// (row-major over the leading axes).
pub trait GridSource: Sync {
    fn axes(&self) -> &[Axis];

    fn fill_row(&self, r: usize, out: &mut [f64]);

    /// Borrows row `r`, filling `buf` if the source is not stored.
    fn row<'a>(&'a self, r: usize, buf: &'a mut Vec<f64>) -> &'a [f64] {
        let n = self.axes().last().map_or(0, |a| a.res);
        buf.resize(n, 0.0);
        self.fill_row(r, buf);
        buf
    }

    fn n_rows(&self) -> usize {
        let a = self.axes();
        a[..a.len() - 1].iter().map(|a| a.res).product()
    }

    fn cell_volume(&self) -> f64 {
        self.axes().iter().map(|a| a.h()).product()
    }
}

impl GridSource for GridDensity {
    fn axes(&self) -> &[Axis] {
        &self.axes
    }

    fn fill_row(&self, r: usize, out: &mut [f64]) {
        out.copy_from_slice(GridDensity::row(self, r));
    }

    fn row<'a>(&'a self, r: usize, _buf: &'a mut Vec<f64>) -> &'a [f64] {
        GridDensity::row(self, r)
    }
}

/// A density evaluated on demand, one row at a time.
///
/// The row function receives the midpoints of the leading axes, the last axis
/// and the output row.
pub struct ProceduralDensity<F> {
    axes: Vec<Axis>,
    f: F,
}

impl<F> ProceduralDensity<F>
where
    F: Fn(&[f64], &Axis, &mut [f64]) + Sync,
{
    pub fn new(axes: Vec<Axis>, f: F) -> Result<Self> {
        if axes.len() < 2 {
            return Err(Error::InvalidGrid(
                "procedural sources need at least two axes".into(),
            ));
        }
        Ok(ProceduralDensity { axes, f })
    }
}

impl ProceduralDensity<()> {
    /// Wraps a pointwise function `f(point)`.
    #[allow(clippy::type_complexity)]
    pub fn pointwise<G>(
        axes: Vec<Axis>,
        g: G,
    ) -> Result<ProceduralDensity<impl Fn(&[f64], &Axis, &mut [f64]) + Sync>>
    where
        G: Fn(&[f64]) -> f64 + Sync,
    {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("at least one axis required".into()));
        }
        Ok(ProceduralDensity {
            axes,
            f: move |x: &[f64], last: &Axis, out: &mut [f64]| {
                let mut p = x.to_vec();
                p.push(0.0);
                let k = p.len() - 1;
                for (i, o) in out.iter_mut().enumerate() {
                    p[k] = last.mid(i);
                    *o = g(&p);
                }
            },
        })
    }
}

impl<F> GridSource for ProceduralDensity<F>
where
    F: Fn(&[f64], &Axis, &mut [f64]) + Sync,
{
    fn axes(&self) -> &[Axis] {
        &self.axes
    }

    fn fill_row(&self, r: usize, out: &mut [f64]) {
        let lead = &self.axes[..self.axes.len() - 1];
        let mut x = vec![0.0; lead.len()];
        let mut rem = r;
        for i in (0..lead.len()).rev() {
            x[i] = lead[i].mid(rem % lead[i].res);
            rem /= lead[i].res;
        }
        (self.f)(&x, &self.axes[self.axes.len() - 1], out);
    }

    fn n_rows(&self) -> usize {
        self.axes[..self.axes.len() - 1].iter().map(|a| a.res).product()
    }
}

/// One pass over a source: `(mass, S(f / mass))`.
///
/// Uses `S(f/M) = Σ v ln v · Δ / M − ln M`, so unnormalized sources are fine.
pub fn mass_entropy<S: GridSource + ?Sized>(src: &S) -> Result<(f64, f64)> {
    let n_rows = src.n_rows();
    let sums = par::sum_vec_chunked(n_rows, 2, 16, |r, acc| {
        let mut buf = Vec::new();
        let row = src.row(r, &mut buf);
        for &v in row {
            if !(v.is_finite() && v >= 0.0) {
                acc[0] = f64::NAN;
            }
            acc[0] += v;
            acc[1] += plogp(v);
        }
    });
    let vol = src.cell_volume();
    let mass = sums[0] * vol;
    if mass.is_nan() {
        return Err(Error::InvalidGrid(
            "source produced negative or non-finite samples".into(),
        ));
    }
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok((mass, sums[1] * vol / mass - mass.ln()))
}
