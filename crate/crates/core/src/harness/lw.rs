//! Loomis-Whitney type inequalities and their entropy duals.

use serde_json::json;

use super::constants::{corank_constants, euclidean_constants, ScaledData};
use super::geometry::{Geometry, PullbackProduct, Quadrature};
use super::raster::Raster;
use super::{tolerance, Report};
use crate::density::{pushforward_entropy, GridDensity, GridSource};
use crate::error::{Error, Result};
use crate::group::CorankGroup;
use crate::par;

fn max_h(fs: &[GridDensity]) -> f64 {
    fs.iter().map(|f| f.max_h()).fold(0.0, f64::max)
}

fn check_len(fs: &[GridDensity], m: usize) -> Result<()> {
    if fs.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: fs.len(),
        });
    }
    Ok(())
}

fn lhs_on(geom: &Geometry, fs: &[GridDensity]) -> Result<(f64, Quadrature)> {
    let js: Vec<usize> = (1..=fs.len()).collect();
    let quad = Quadrature::covering(geom, &js, fs)?;
    let v = PullbackProduct::new(geom, &js, fs, &quad)?.integral();
    Ok((v, quad))
}

/// `∫_{ℝ^k} ∏ f_j(x without x_j)` for `k = fs.len()`.
pub fn euclidean_multilinear_lhs(fs: &[GridDensity]) -> Result<f64> {
    let geom = Geometry::euclidean(fs.len())?;
    Ok(lhs_on(&geom, fs)?.0)
}

/// `∫ ∏_{j ≤ d+2n} f_j∘π_j ≤ C(d,α) ∏ ‖f_j‖_{p_j}` with `p_j = 1/c_j` from
/// [`corank_constants`] and `‖R‖ = r_norm`.
pub fn verify_lw(g: &CorankGroup, fs: &[GridDensity], r_norm: f64) -> Result<Report> {
    check_len(fs, g.horizontal_dim())?;
    let sd = corank_constants(g);
    let (lhs, quad) = lhs_on(&Geometry::corank(g), fs)?;
    let norms: Vec<f64> = fs
        .iter()
        .zip(sd.c_f64())
        .map(|(f, c)| f.lp_norm(1.0 / c))
        .collect();
    let constant = sd.d().value(r_norm).exp();
    let rhs = constant * norms.iter().product::<f64>();
    let h = max_h(fs).max(quad.max_h());
    Ok(Report::new("lw", lhs, rhs, tolerance::quadrature(h, rhs))
        .with("group", json!({"d": g.d(), "n": g.n(), "alpha": g.alpha()}))
        .with("r_norm", r_norm)
        .with("constant", constant)
        .with("exponents", json!(sd.exponents().iter().map(|e| e.to_string()).collect::<Vec<_>>()))
        .with("norms", json!(norms))
        .with("res", json!(fs[0].res()))
        .with("h", h))
}

/// `∫ ∏_{j ≤ d+2n+1} f_j∘π_j ≤ ∏ ‖f_j‖_{d+2n}`; the last input lives on the `x` space.
pub fn verify_nonlinear_lw(g: &CorankGroup, fs: &[GridDensity]) -> Result<Report> {
    check_len(fs, g.num_projections())?;
    let (lhs, quad) = lhs_on(&Geometry::corank(g), fs)?;
    let p = g.horizontal_dim() as f64;
    let norms: Vec<f64> = fs.iter().map(|f| f.lp_norm(p)).collect();
    let rhs = norms.iter().product::<f64>();
    let h = max_h(fs).max(quad.max_h());
    Ok(Report::new("nonlinear-lw", lhs, rhs, tolerance::quadrature(h, rhs))
        .with("group", json!({"d": g.d(), "n": g.n(), "alpha": g.alpha()}))
        .with("exponent", p)
        .with("norms", json!(norms))
        .with("res", json!(fs[0].res()))
        .with("h", h))
}

fn set_report(name: &str, e: &Raster, geom: &Geometry, c: &[f64], log_const: f64) -> Result<Report> {
    let proj: Vec<f64> = (1..=c.len())
        .map(|j| Ok(e.project(geom, j)?.measure()))
        .collect::<Result<_>>()?;
    let lhs = e.measure();
    let rhs = log_const.exp() * proj.iter().zip(c).map(|(m, c)| m.powf(*c)).product::<f64>();
    let h = e.max_h();
    Ok(Report::new(name, lhs, rhs, tolerance::raster(h, rhs))
        .with("projections", json!(proj))
        .with("res", json!(e.axes().iter().map(|a| a.res).collect::<Vec<_>>()))
        .with("h", h)
        .with("empty", e.is_empty()))
}

/// `m(E) ≤ C(d,α) ∏_{j ≤ d+2n} m(π_j E)^{c_j}` on a raster over `ℝ^{d+2n+1}`.
pub fn verify_set_lw(g: &CorankGroup, e: &Raster, r_norm: f64) -> Result<Report> {
    let sd = corank_constants(g);
    Ok(set_report("set-lw", e, &Geometry::corank(g), &sd.c_f64(), sd.d().value(r_norm))?
        .with("group", json!({"d": g.d(), "n": g.n(), "alpha": g.alpha()}))
        .with("r_norm", r_norm))
}

/// Classical `m(E) ≤ ∏ m(P_j E)^{1/(k−1)}` on `ℝ^k`.
pub fn verify_set_lw_euclidean(e: &Raster) -> Result<Report> {
    let sd = euclidean_constants(e.k())?;
    set_report("set-lw-euclidean", e, &Geometry::euclidean(e.k())?, &sd.c_f64(), 0.0)
}

fn require_normalized(f: &GridDensity) -> Result<()> {
    if !f.is_normalized() {
        return Err(Error::NotNormalized { mass: f.total_mass() });
    }
    Ok(())
}

/// `Σ c_j S(f_(π_j)) ≤ S(f) + D` for a normalized density on `H(d, α)`.
///
/// `sd` carries one weight per projection, starting at `π_1`.
pub fn subadditivity_check(g: &CorankGroup, f: &GridDensity, sd: &ScaledData, r_norm: f64) -> Result<Report> {
    require_normalized(f)?;
    if sd.c().len() > g.num_projections() {
        return Err(Error::DimensionMismatch {
            expected: g.num_projections(),
            got: sd.c().len(),
        });
    }
    let c = sd.c_f64();
    let ents: Vec<f64> = (1..=c.len())
        .map(|j| Ok(pushforward_entropy(g, j, f)?.1))
        .collect::<Result<_>>()?;
    let s = f.entropy()?;
    let lhs: f64 = ents.iter().zip(&c).map(|(e, c)| e * c).sum();
    let d = sd.d().value(r_norm);
    let rhs = s + d;
    let terms = c.iter().sum::<f64>() + 1.0;
    Ok(Report::new("subadditivity", lhs, rhs, tolerance::entropy(f.max_h(), terms))
        .with("group", json!({"d": g.d(), "n": g.n(), "alpha": g.alpha()}))
        .with("projection_entropies", json!(ents))
        .with("entropy", s)
        .with("D", sd.d().to_string())
        .with("D_value", d)
        .with("r_norm", r_norm)
        .with("res", json!(f.res())))
}

/// `Σ c_j S(f_(P_j)) ≤ S(f) + D` for the coordinate projections of `ℝ^k`.
pub fn subadditivity_check_euclidean(f: &GridDensity, sd: &ScaledData) -> Result<Report> {
    require_normalized(f)?;
    if sd.c().len() != f.k() {
        return Err(Error::DimensionMismatch {
            expected: f.k(),
            got: sd.c().len(),
        });
    }
    let ents: Vec<f64> = (0..f.k())
        .map(|j| f.coordinate_pushforward(&[j])?.entropy())
        .collect::<Result<_>>()?;
    let lhs: f64 = ents.iter().zip(sd.c_f64()).map(|(e, c)| e * c).sum();
    let rhs = f.entropy()? + sd.d().value(1.0);
    Ok(Report::new("subadditivity-euclidean", lhs, rhs, tolerance::entropy(f.max_h(), f.k() as f64 + 1.0))
        .with("projection_entropies", json!(ents)))
}

/// `∫ f ln F − S(f) − ln ∫ F` for `f = F/∫F`; zero up to rounding.
pub fn mcc2_residual(big_f: &GridDensity) -> Result<f64> {
    let z = big_f.total_mass();
    if !(z > 0.0) {
        return Err(Error::ZeroMass);
    }
    let f = big_f.normalize()?;
    let vol = f.cell_volume();
    let (fv, bv) = (f.values(), big_f.values());
    let cross = par::sum(fv.len(), |i| if fv[i] > 0.0 { fv[i] * bv[i].ln() } else { 0.0 }) * vol;
    Ok(cross - f.entropy()? - z.ln())
}

/// Both sides of the entropy duality for LW inputs `f_j`.
///
/// With `G_j = f_j^{p_j}` (so `f_j = G_j^{c_j}`), `F = ∏ f_j∘π_j`, `f = F/∫F`
/// and `KL_j = S(f_(π_j)) − ∫ f ln(G_j∘π_j) + ln ∫ G_j ≥ 0`, one has
/// `lw_gap = entropy_gap − Σ c_j KL_j`. A pass of the entropy form at
/// tolerance `τ` thus gives the multilinear form at `τ + Σ c_j max(0, −KL_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityBridge {
    /// `ln ∫F − D − Σ c_j ln ∫ G_j`, the log of LHS/RHS in [`verify_lw`].
    pub lw_gap: f64,
    /// `Σ c_j S(f_(π_j)) − S(f) − D`.
    pub entropy_gap: f64,
    pub kl: Vec<f64>,
    /// `lw_gap − entropy_gap + Σ c_j KL_j`.
    pub residual: f64,
    /// Tolerance transferred from the entropy form to the multilinear form.
    pub transfer: f64,
}

/// Evaluates [`DualityBridge`] for inputs `gs` (one per `π_j`, `j ≤ d+2n`).
pub fn duality_bridge(g: &CorankGroup, gs: &[GridDensity], r_norm: f64) -> Result<DualityBridge> {
    check_len(gs, g.horizontal_dim())?;
    let sd = corank_constants(g);
    let c = sd.c_f64();
    let geom = Geometry::corank(g);
    let js: Vec<usize> = (1..=gs.len()).collect();
    let quad = Quadrature::covering(&geom, &js, gs)?;
    let big_f = GridDensity::from_source(&PullbackProduct::new(&geom, &js, gs, &quad)?)?;
    let z = big_f.total_mass();
    if !(z > 0.0) {
        return Err(Error::ZeroMass);
    }
    let f = big_f.normalize()?;
    let s = f.entropy()?;
    let d = sd.d().value(r_norm);
    let vol = f.cell_volume();
    let mut kl = Vec::with_capacity(gs.len());
    let mut ent_sum = 0.0;
    let mut mass_sum = 0.0;
    for (i, gj) in gs.iter().enumerate() {
        let pulled = PullbackProduct::new(&geom, &[i + 1], std::slice::from_ref(gj), &quad)?;
        let len = quad.t_axis.res;
        let cross = par::sum_chunked(f.n_rows(), 16, |r| {
            let mut row = vec![0.0; len];
            pulled.fill_row(r, &mut row);
            f.row(r)
                .iter()
                .zip(&row)
                .map(|(a, b)| if *a > 0.0 { a * b.ln() } else { 0.0 })
                .sum()
        }) * vol;
        let p = 1.0 / c[i];
        let cross = p * cross;
        let s_j = pushforward_entropy(g, i + 1, &f)?.1;
        let log_mass = p * gj.lp_norm(p).ln();
        kl.push(s_j - cross + log_mass);
        ent_sum += c[i] * s_j;
        mass_sum += c[i] * log_mass;
    }
    let lw_gap = z.ln() - d - mass_sum;
    let entropy_gap = ent_sum - s - d;
    let weighted_kl: f64 = kl.iter().zip(&c).map(|(k, c)| k * c).sum();
    let transfer = kl.iter().zip(&c).map(|(k, c)| c * (-k).max(0.0)).sum();
    Ok(DualityBridge {
        lw_gap,
        entropy_gap,
        residual: lw_gap - entropy_gap + weighted_kl,
        kl,
        transfer,
    })
}
