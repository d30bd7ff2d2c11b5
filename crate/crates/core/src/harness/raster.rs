//! Boolean rasters of sets and their projections.

use super::geometry::Geometry;
use crate::density::{Axis, GridDensity};
use crate::error::{Error, Result};
use crate::par;

/// A set given by the cells of a grid (row-major, last axis contiguous).
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    axes: Vec<Axis>,
    cells: Vec<bool>,
}

impl Raster {
    pub fn new(axes: Vec<Axis>, cells: Vec<bool>) -> Result<Self> {
        let len: usize = axes.iter().map(|a| a.res).product();
        if axes.is_empty() || cells.len() != len {
            return Err(Error::InvalidGrid(format!(
                "raster needs {len} cells, got {}",
                cells.len()
            )));
        }
        Ok(Raster { axes, cells })
    }

    pub fn empty(axes: Vec<Axis>) -> Self {
        let len = axes.iter().map(|a| a.res).product();
        Raster {
            axes,
            cells: vec![false; len],
        }
    }

    /// Cells whose midpoint satisfies `pred`.
    pub fn from_fn(axes: Vec<Axis>, pred: impl Fn(&[f64]) -> bool + Sync + Send) -> Result<Self> {
        let mut r = Raster::empty(axes);
        if r.axes.is_empty() {
            return Err(Error::InvalidGrid("raster needs an axis".into()));
        }
        let axes = r.axes.clone();
        let k = axes.len();
        let row_len = axes[k - 1].res;
        par::for_each_row_mut(&mut r.cells, row_len, |row_idx, row| {
            let mut p = vec![0.0; k];
            let mut rem = row_idx;
            for i in (0..k - 1).rev() {
                p[i] = axes[i].mid(rem % axes[i].res);
                rem /= axes[i].res;
            }
            for (i, c) in row.iter_mut().enumerate() {
                p[k - 1] = axes[k - 1].mid(i);
                *c = pred(&p);
            }
        });
        Ok(r)
    }

    /// Cells where the grid value satisfies `pred`.
    pub fn from_grid(f: &GridDensity, pred: impl Fn(f64) -> bool) -> Self {
        Raster {
            axes: f.axes().to_vec(),
            cells: f.values().iter().map(|v| pred(*v)).collect(),
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn k(&self) -> usize {
        self.axes.len()
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|c| *c)
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.h()).product()
    }

    pub fn max_h(&self) -> f64 {
        self.axes.iter().map(|a| a.h()).fold(0.0, f64::max)
    }

    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.cell_volume()
    }

    /// Indicator function as a grid.
    pub fn to_grid(&self) -> GridDensity {
        GridDensity::new(
            self.axes.clone(),
            self.cells.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect(),
        )
        .expect("same shape")
    }

    /// True if a set cell touches the outer layer of the grid.
    pub fn touches_boundary(&self) -> bool {
        let k = self.k();
        let mut idx = vec![0usize; k];
        self.cells.iter().enumerate().any(|(n, &c)| {
            if !c {
                return false;
            }
            let mut rem = n;
            for i in (0..k).rev() {
                idx[i] = rem % self.axes[i].res;
                rem /= self.axes[i].res;
            }
            idx.iter()
                .zip(&self.axes)
                .any(|(&i, a)| i == 0 || i + 1 == a.res)
        })
    }

    /// `π_j(E)`, marking the output cell containing the image of every set cell midpoint.
    ///
    /// For sheared projections the output `s` axis is the input `t` axis
    /// extended on both sides, so unsheared cells map onto cells.
    pub fn project(&self, geom: &Geometry, j: usize) -> Result<Raster> {
        let k = geom.dim();
        if self.k() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: self.k(),
            });
        }
        let spec = geom.spec(j)?;
        let t_axis = self.axes[k - 1];
        let row_len = t_axis.res;
        if geom.is_center(spec) {
            let out_axes = self.axes[..k - 1].to_vec();
            let cells = par::map_collect(self.cells.len() / row_len, |r| {
                self.cells[r * row_len..(r + 1) * row_len].iter().any(|c| *c)
            });
            return Raster::new(out_axes, cells);
        }
        let kept = geom.kept(spec);
        let del = spec.deleted;
        let smax = spec.shear.map_or(0.0, |(c, a, b)| {
            c.abs() * self.axes[a].max_abs_mid() * self.axes[b].max_abs_mid()
        });
        let ext = if smax > 0.0 {
            (smax / t_axis.h()).ceil() as usize + 1
        } else {
            0
        };
        let s_axis = t_axis.extended(ext);
        let mut out_axes: Vec<Axis> = kept.iter().map(|&i| self.axes[i]).collect();
        out_axes.push(s_axis);
        let mut out = Raster::empty(out_axes);
        let in_axes = &self.axes;
        par::for_each_row_mut(&mut out.cells, s_axis.res, |r_out, row| {
            let mut full = vec![0usize; k - 1];
            let mut rem = r_out;
            for &i in kept.iter().rev() {
                full[i] = rem % in_axes[i].res;
                rem /= in_axes[i].res;
            }
            for id in 0..in_axes[del].res {
                full[del] = id;
                let r_in = full
                    .iter()
                    .zip(in_axes)
                    .fold(0usize, |acc, (&i, a)| acc * a.res + i);
                let cells = &self.cells[r_in * row_len..(r_in + 1) * row_len];
                let shift = spec.shear.map_or(0.0, |(c, a, b)| {
                    c * in_axes[a].mid(full[a]) * in_axes[b].mid(full[b])
                });
                for (it, &set) in cells.iter().enumerate() {
                    if set {
                        let s = t_axis.mid(it) + shift;
                        let pos = ((s - s_axis.lower) / s_axis.h()).floor();
                        if pos >= 0.0 && (pos as usize) < s_axis.res {
                            row[pos as usize] = true;
                        }
                    }
                }
            }
        });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CorankGroup;

    #[test]
    fn unit_cube_projections_in_h1() {
        // m(π_1 E) = ∫ (1 + y/2) dy = 5/4 for E = [0,1]³
        let g = CorankGroup::heisenberg(1).unwrap();
        let geom = Geometry::corank(&g);
        let a = Axis::new(0.0, 1.0, 128).unwrap();
        let e = Raster::from_fn(vec![a, a, a], |_| true).unwrap();
        assert!((e.measure() - 1.0).abs() < 1e-12);
        for j in [1, 2] {
            let p = e.project(&geom, j).unwrap();
            assert!((p.measure() - 1.25).abs() < 2.0 * a.h(), "{}", p.measure());
        }
        let x = e.project(&geom, 3).unwrap();
        assert!((x.measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn euclidean_brick() {
        let geom = Geometry::euclidean(3).unwrap();
        let axes = vec![
            Axis::new(0.0, 2.0, 8).unwrap(),
            Axis::new(0.0, 1.0, 8).unwrap(),
            Axis::new(0.0, 3.0, 8).unwrap(),
        ];
        let e = Raster::from_fn(axes, |_| true).unwrap();
        let m: Vec<f64> = (1..=3).map(|j| e.project(&geom, j).unwrap().measure()).collect();
        assert!((m[0] - 3.0).abs() < 1e-12 && (m[1] - 6.0).abs() < 1e-12 && (m[2] - 2.0).abs() < 1e-12);
        assert!((e.measure() - (m[0] * m[1] * m[2]).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn projection_contains_image_of_points() {
        let g = CorankGroup::new(1, vec![2.0]).unwrap();
        let geom = Geometry::corank(&g);
        let a = Axis::centered(1.0, 10).unwrap();
        let e = Raster::from_fn(vec![a; 4], |p| p.iter().map(|x| x * x).sum::<f64>() < 0.7).unwrap();
        for j in 1..=4 {
            let pj = e.project(&geom, j).unwrap();
            let axes = pj.axes().to_vec();
            for (n, &c) in e.cells().iter().enumerate() {
                if !c {
                    continue;
                }
                let mut idx = [0usize; 4];
                let mut rem = n;
                for i in (0..4).rev() {
                    idx[i] = rem % 10;
                    rem /= 10;
                }
                let p: Vec<f64> = idx.iter().map(|&i| a.mid(i)).collect();
                let y = geom.project(j, &p).unwrap();
                let flat = y.iter().zip(&axes).fold(0usize, |acc, (v, ax)| {
                    acc * ax.res + ((v - ax.lower) / ax.h()).floor() as usize
                });
                assert!(pj.cells()[flat]);
            }
        }
    }

    #[test]
    fn empty_set() {
        let geom = Geometry::euclidean(2).unwrap();
        let e = Raster::empty(vec![Axis::centered(1.0, 4).unwrap(); 2]);
        assert!(e.is_empty());
        assert_eq!(e.project(&geom, 1).unwrap().measure(), 0.0);
    }
}
