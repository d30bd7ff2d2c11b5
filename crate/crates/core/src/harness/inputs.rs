//! Seeded random inputs for the inequality checks.
//!
//! Functions are sums of compact bumps `w (1 − |u|²)³₊`, `u = (x − c)/r`, so
//! every input vanishes near the faces of its box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::raster::Raster;
use crate::density::{Axis, GridDensity};
use crate::error::{Error, Result};
use crate::group::CorankGroup;

/// Half-width of the boxes used for random inputs.
pub const HALF_WIDTH: f64 = 1.0;

#[derive(Debug, Clone)]
struct Bump {
    center: Vec<f64>,
    radii: Vec<f64>,
    weight: f64,
}

impl Bump {
    fn random(rng: &mut ChaCha8Rng, dim: usize) -> Self {
        Bump {
            center: (0..dim).map(|_| rng.random_range(-0.35..0.35)).collect(),
            radii: (0..dim).map(|_| rng.random_range(0.3..0.6)).collect(),
            weight: rng.random_range(0.5..1.5),
        }
    }

    fn eval(&self, p: &[f64]) -> f64 {
        let u: f64 = p
            .iter()
            .zip(&self.center)
            .zip(&self.radii)
            .map(|((x, c), r)| ((x - c) / r).powi(2))
            .sum();
        if u < 1.0 {
            self.weight * (1.0 - u).powi(3)
        } else {
            0.0
        }
    }

    fn contains(&self, p: &[f64]) -> bool {
        self.eval(p) > 0.0
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn bumps(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Bump> {
    let count = rng.random_range(1..=3);
    (0..count).map(|_| Bump::random(rng, dim)).collect()
}

/// A random bump sum on `[-1, 1]^k` at `res` cells per axis.
pub fn bump_function(k: usize, res: usize, seed: u64, stream: u64) -> Result<GridDensity> {
    let mut rng = rng_for(seed, stream);
    let b = bumps(&mut rng, k);
    GridDensity::from_fn(vec![Axis::centered(HALF_WIDTH, res)?; k], move |p| {
        b.iter().map(|x| x.eval(p)).sum()
    })
}

/// Inputs `f_1, …, f_{d+2n}` for the main inequality, on common axes.
pub fn lw_inputs(g: &CorankGroup, res: usize, seed: u64) -> Result<Vec<GridDensity>> {
    let m = g.horizontal_dim();
    (0..m).map(|j| bump_function(m, res, seed, j as u64)).collect()
}

/// Inputs `f_1, …, f_{d+2n+1}` for the nonlinear inequality; the last one
/// lives on the `x` space.
pub fn nonlinear_inputs(g: &CorankGroup, res: usize, seed: u64) -> Result<Vec<GridDensity>> {
    let m = g.horizontal_dim();
    (0..=m).map(|j| bump_function(m, res, seed, 100 + j as u64)).collect()
}

/// A union of random ellipsoids in `[-1, 1]^{d+2n+1}`.
pub fn random_set(g: &CorankGroup, res: usize, seed: u64) -> Result<Raster> {
    let k = g.topo_dim();
    let mut rng = rng_for(seed, 200);
    let b = bumps(&mut rng, k);
    Raster::from_fn(vec![Axis::centered(HALF_WIDTH, res)?; k], move |p| {
        b.iter().any(|x| x.contains(p))
    })
}

/// Half-width of the box used by [`random_density`].
pub const DENSITY_HALF_WIDTH: f64 = 1.6;

/// A normalized random density on `H(d, α)`: bumps in `(x, t − κ x_a x_b)`
/// with a random `κ ∈ [−½, ½]` per pair, so `t` correlates with the twist.
pub fn random_density(g: &CorankGroup, res: usize, seed: u64) -> Result<GridDensity> {
    let k = g.topo_dim();
    let mut rng = rng_for(seed, 300);
    let b = bumps(&mut rng, k);
    let pairs: Vec<(usize, usize, f64)> = (0..g.n())
        .map(|i| {
            let (a, bb) = g.pair_axes(i);
            (a, bb, rng.random_range(-0.5..0.5))
        })
        .collect();
    GridDensity::from_fn(vec![Axis::centered(DENSITY_HALF_WIDTH, res)?; k], move |p| {
        let mut q = p.to_vec();
        for &(a, bb, kappa) in &pairs {
            q[k - 1] -= kappa * p[a] * p[bb];
        }
        b.iter().map(|x| x.eval(&q)).sum()
    })?
    .normalize()
}

/// `A exp(−|x|²/(2σ²) − t²/(2σ_t²))` on a box of half-width `half` in `x` and
/// `half²` in `t` (the dilation-adapted box).
pub fn gaussian_bump(g: &CorankGroup, res: usize, half: f64, sigma: f64, sigma_t: f64, amplitude: f64) -> Result<GridDensity> {
    if !(sigma > 0.0 && sigma_t > 0.0) {
        return Err(Error::NonPositiveScale(sigma.min(sigma_t)));
    }
    let k = g.topo_dim();
    let mut axes = vec![Axis::centered(half, res)?; k];
    axes[k - 1] = Axis::centered(half * half, res)?;
    GridDensity::from_fn(axes, move |p| {
        let x2: f64 = p[..k - 1].iter().map(|x| x * x).sum();
        amplitude * (-0.5 * x2 / (sigma * sigma) - 0.5 * p[k - 1] * p[k - 1] / (sigma_t * sigma_t)).exp()
    })
}

/// `f ∘ δ_{1/r}^{(j)}`: the grid of an input to `π_j` with its axes scaled by
/// the projected dilation exponents.
pub fn dilate_input(g: &CorankGroup, j: usize, f: &GridDensity, r: f64) -> Result<GridDensity> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveScale(r));
    }
    let e = g.projected_dilation_exponents(j)?;
    if e.len() != f.k() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            got: f.k(),
        });
    }
    let axes = f
        .axes()
        .iter()
        .zip(&e)
        .map(|(a, &p)| a.scaled(r.powi(p as i32)))
        .collect();
    GridDensity::new(axes, f.values().to_vec())
}
