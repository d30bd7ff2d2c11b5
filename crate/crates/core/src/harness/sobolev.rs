//! The `L¹` Sobolev inequality, its level-set estimate and the isoperimetric
//! inequality, on sampled functions.

use serde_json::json;

use super::constants::corank_constants;
use super::geometry::Geometry;
use super::raster::Raster;
use super::{tolerance, Report};
use crate::density::{strides, unravel, GridDensity};
use crate::error::{Error, Result};
use crate::group::CorankGroup;
use crate::par;

/// `X_i f` on the grid of `f` for every horizontal direction, by central
/// differences with zero ghosts. Component `i` has the layout of `f.values()`.
pub fn horizontal_gradient_grid(g: &CorankGroup, f: &GridDensity) -> Result<Vec<Vec<f64>>> {
    let k = g.topo_dim();
    if f.k() != k {
        return Err(Error::DimensionMismatch { expected: k, got: f.k() });
    }
    let m = k - 1;
    let axes = f.axes().to_vec();
    let st = strides(&axes);
    let v = f.values();
    let row_len = f.row_len();
    let rows = par::map_collect(f.n_rows(), |r| {
        let mut idx = vec![0usize; k];
        unravel(r * row_len, &axes, &mut idx);
        let x: Vec<f64> = (0..m).map(|i| axes[i].mid(idx[i])).collect();
        let coef: Vec<f64> = (0..m).map(|i| g.vector_field_coefficient(i, &x)).collect();
        let mut out = vec![0.0; m * row_len];
        for it in 0..row_len {
            let n = r * row_len + it;
            let diff = |a: usize, i: usize| {
                let up = if i + 1 < axes[a].res { v[n + st[a]] } else { 0.0 };
                let dn = if i > 0 { v[n - st[a]] } else { 0.0 };
                (up - dn) / (2.0 * axes[a].h())
            };
            let dt = diff(k - 1, it);
            for a in 0..m {
                out[a * row_len + it] = diff(a, idx[a]) + coef[a] * dt;
            }
        }
        out
    });
    let mut comps = vec![vec![0.0; f.len()]; m];
    for (r, row) in rows.iter().enumerate() {
        for (a, comp) in comps.iter_mut().enumerate() {
            comp[r * row_len..(r + 1) * row_len].copy_from_slice(&row[a * row_len..(a + 1) * row_len]);
        }
    }
    Ok(comps)
}

fn boundary_max(f: &GridDensity) -> f64 {
    let mut idx = vec![0usize; f.k()];
    let mut best = 0.0f64;
    for (n, &v) in f.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        unravel(n, f.axes(), &mut idx);
        if idx.iter().zip(f.axes()).any(|(&i, a)| i == 0 || i + 1 == a.res) {
            best = best.max(v.abs());
        }
    }
    best
}

/// `(C(d,α) 2^{2Q/(Q−1)})^{(Q−1)/Q}`, the constant in `‖f‖_{Q/(Q−1)} ≤ C ‖∇f‖₁`
/// obtained from the level-set argument.
pub fn sobolev_constant(g: &CorankGroup, r_norm: f64) -> f64 {
    let q = g.homogeneous_dim() as f64;
    let c = corank_constants(g).d().value(r_norm).exp();
    (c * 2f64.powf(2.0 * q / (q - 1.0))).powf((q - 1.0) / q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetOptions {
    /// Bands with fewer cells are skipped.
    pub min_cells: usize,
    /// Levels below `floor · max|f|` are skipped.
    pub floor: f64,
}

impl Default for LevelSetOptions {
    fn default() -> Self {
        LevelSetOptions {
            min_cells: 8,
            floor: 1e-6,
        }
    }
}

/// Largest change of `f` between a cell and one of its neighbours (zero ghosts).
fn cell_jumps(f: &GridDensity) -> Vec<f64> {
    let axes = f.axes().to_vec();
    let st = strides(&axes);
    let v = f.values();
    par::map_collect(v.len(), |n| {
        let mut worst = 0.0f64;
        for (a, ax) in axes.iter().enumerate() {
            let i = (n / st[a]) % ax.res;
            let up = if i + 1 < ax.res { v[n + st[a]] } else { 0.0 };
            let dn = if i > 0 { v[n - st[a]] } else { 0.0 };
            worst = worst.max((up - v[n]).abs()).max((v[n] - dn).abs());
        }
        worst
    })
}

/// With `F_k = {2^{k−1} ≤ |f| < 2^k}`, checks
/// `m(π_j F_k) ≤ 2^{−k+2} ∫_{F_{k−1}} |X_j f|` for every horizontal `j` and
/// every `k` such that
///
/// - the lower band `F_{k−1}` lies above twice the largest boundary value, so
///   every fiber leaving `F_k` crosses it inside the box;
/// - the grid resolves `F_{k−1}`: it has at least `min_cells` cells and no one-cell jump of `f` inside it exceeds
///   its width `2^{k−2}`.
pub fn level_set_check(g: &CorankGroup, f: &GridDensity, opts: LevelSetOptions) -> Result<Vec<Report>> {
    let fmax = f.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if fmax == 0.0 {
        return Ok(vec![Report::new("level-set", 0.0, 0.0, 0.0).with("vacuous", true)]);
    }
    let grad = horizontal_gradient_grid(g, f)?;
    let geom = Geometry::corank(g);
    let bmax = boundary_max(f);
    let vol = f.cell_volume();
    let h = f.max_h();
    let jumps = cell_jumps(f);
    let k_top = fmax.log2().floor() as i32 + 1;
    let band = |k: i32| {
        let (lo, hi) = (2f64.powi(k - 1), 2f64.powi(k));
        move |v: f64| v.abs() >= lo && v.abs() < hi
    };
    let mut reports = Vec::new();
    let mut k = k_top;
    loop {
        let lower = 2f64.powi(k - 2);
        if lower < 2.0 * bmax || lower < opts.floor * fmax {
            break;
        }
        let fk = Raster::from_grid(f, band(k));
        let below = band(k - 1);
        let (below_cells, resolved) = f
            .values()
            .iter()
            .zip(&jumps)
            .filter(|(v, _)| below(**v))
            .fold((0usize, true), |(c, ok), (_, d)| (c + 1, ok && *d <= lower));
        let resolved = resolved && below_cells >= opts.min_cells;
        if fk.count() >= opts.min_cells && resolved {
            for j in 1..=g.horizontal_dim() {
                let proj = fk.project(&geom, j)?.measure();
                let comp = &grad[j - 1];
                let integral: f64 = f
                    .values()
                    .iter()
                    .zip(comp)
                    .filter(|(v, _)| below(**v))
                    .map(|(_, d)| d.abs())
                    .sum::<f64>()
                    * vol;
                let rhs = 2f64.powi(2 - k) * integral;
                reports.push(
                    Report::new(format!("level-set j={j} k={k}"), proj, rhs, tolerance::raster(h, rhs))
                        .with("j", j)
                        .with("k", k)
                        .with("cells", fk.count()),
                );
            }
        }
        k -= 1;
    }
    if reports.is_empty() {
        reports.push(Report::new("level-set", 0.0, 0.0, 0.0).with("vacuous", true));
    }
    Ok(reports)
}

fn check_support(f: &GridDensity) -> Result<()> {
    let fmax = f.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let b = boundary_max(f);
    if b > 1e-8 * fmax {
        return Err(Error::SupportNotCovered(format!(
            "function reaches {b:e} on the box faces (max {fmax:e})"
        )));
    }
    Ok(())
}

/// `‖f‖_{Q/(Q−1)} ≤ C ‖∇f‖₁` with `C` from [`sobolev_constant`].
pub fn sobolev_check(g: &CorankGroup, f: &GridDensity, r_norm: f64) -> Result<Report> {
    check_support(f)?;
    let grad = horizontal_gradient_grid(g, f)?;
    let q = g.homogeneous_dim() as f64;
    let p = q / (q - 1.0);
    let vol = f.cell_volume();
    let lhs = f.values().iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p) * vol.powf(1.0 / p);
    let grad_l1 = par::sum(f.len(), |n| grad.iter().map(|c| c[n] * c[n]).sum::<f64>().sqrt()) * vol;
    let partial_l1: Vec<f64> = grad.iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>() * vol).collect();
    let c_chain = sobolev_constant(g, r_norm);
    let rhs = c_chain * grad_l1;
    let weights = corank_constants(g).c_f64();
    let weighted: f64 = partial_l1.iter().zip(&weights).map(|(v, c)| v.powf(*c)).product();
    Ok(Report::new("sobolev", lhs, rhs, tolerance::quadrature(f.max_h(), rhs))
        .with("gradient_l1", grad_l1)
        .with("partial_l1", json!(partial_l1))
        .with("weighted_product", weighted)
        .with("constant", c_chain)
        .with("r_norm", r_norm)
        .with("ratio", lhs / grad_l1)
        .with("res", json!(f.res())))
}

/// Separable Gaussian smoothing with standard deviation `sigma` on every axis,
/// kernel truncated at `4σ` and normalized on the grid.
pub fn mollify(f: &GridDensity, sigma: f64) -> Result<GridDensity> {
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveScale(sigma));
    }
    let axes = f.axes().to_vec();
    let st = strides(&axes);
    let mut cur = f.values().to_vec();
    for (a, axis) in axes.iter().enumerate() {
        let reach = (4.0 * sigma / axis.h()).ceil() as isize;
        let mut w: Vec<f64> = (-reach..=reach)
            .map(|i| {
                let x = i as f64 * axis.h() / sigma;
                (-0.5 * x * x).exp()
            })
            .collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let src = &cur;
        let n_a = axis.res as isize;
        let next = par::map_collect(src.len(), |n| {
            let i = ((n / st[a]) % axis.res) as isize;
            let mut acc = 0.0;
            for (o, wk) in (-reach..=reach).zip(&w) {
                let j = i + o;
                if j >= 0 && j < n_a {
                    acc += wk * src[(n as isize + o * st[a] as isize) as usize];
                }
            }
            acc
        });
        cur = next;
    }
    GridDensity::new(axes, cur.into_iter().map(|v| v.max(0.0)).collect())
}

/// `m(E)^{(Q−1)/Q} ≤ C · Per(E)`, the perimeter taken as `‖∇(χ_E * φ_w)‖₁`
/// for a Gaussian mollifier of width `w`.
pub fn isoperimetric_check(g: &CorankGroup, e: &Raster, width: f64, r_norm: f64) -> Result<Report> {
    if e.k() != g.topo_dim() {
        return Err(Error::DimensionMismatch {
            expected: g.topo_dim(),
            got: e.k(),
        });
    }
    let margin: Vec<usize> = e.axes().iter().map(|a| (4.0 * width / a.h()).ceil() as usize).collect();
    let mut idx = vec![0usize; e.k()];
    for (n, &c) in e.cells().iter().enumerate() {
        if c {
            unravel(n, e.axes(), &mut idx);
            let near = idx
                .iter()
                .zip(e.axes())
                .zip(&margin)
                .any(|((&i, a), &m)| i < m || i + m >= a.res);
            if near {
                return Err(Error::SupportNotCovered(format!(
                    "set lies within 4 mollifier widths ({width}) of the box faces"
                )));
            }
        }
    }
    let phi = mollify(&e.to_grid(), width)?;
    let grad = horizontal_gradient_grid(g, &phi)?;
    let vol = phi.cell_volume();
    let perimeter = par::sum(phi.len(), |n| grad.iter().map(|c| c[n] * c[n]).sum::<f64>().sqrt()) * vol;
    let q = g.homogeneous_dim() as f64;
    let lhs = e.measure().powf((q - 1.0) / q);
    let c_chain = sobolev_constant(g, r_norm);
    let rhs = c_chain * perimeter;
    Ok(Report::new("isoperimetric", lhs, rhs, tolerance::raster(e.max_h(), rhs))
        .with("measure", e.measure())
        .with("perimeter", perimeter)
        .with("width", width)
        .with("constant", c_chain)
        .with("r_norm", r_norm))
}
