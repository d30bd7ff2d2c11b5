//! Linear Brascamp-Lieb data and their constants over centered Gaussians.
//!
//! Gaussian inputs are `f_j(t) = exp(-π⟨A_j t, t⟩)`, for which `∫ f_j = det(A_j)^{-1/2}`
//! and the BL ratio has the closed form
//!
//! ```text
//! Π_j det(A_j)^{q_j/2} / det(Σ_j q_j L_jᵀ A_j L_j)^{1/2}.
//! ```

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::CorankGroup;
use crate::par;

/// Accumulated forms with a larger condition number are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;
/// Rank tolerance for the sampled dimension condition.
pub const RANK_TOL: f64 = 1e-9;
/// A log-quotient above this is reported as divergence.
pub const DIVERGENCE_LOG: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatumSpec", into = "DatumSpec")]
pub struct BLDatum {
    k: usize,
    maps: Vec<DMatrix<f64>>,
    exps: Vec<f64>,
}

/// Wire form `{"k":3,"maps":[[[...]]],"exps":[...]}`, maps as lists of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatumSpec {
    k: usize,
    maps: Vec<Vec<Vec<f64>>>,
    exps: Vec<f64>,
}

impl TryFrom<DatumSpec> for BLDatum {
    type Error = Error;

    fn try_from(spec: DatumSpec) -> Result<Self> {
        let maps = spec
            .maps
            .iter()
            .map(|rows| {
                let nr = rows.len();
                if nr == 0 || rows.iter().any(|r| r.len() != spec.k) {
                    return Err(Error::InvalidDatum(format!(
                        "each map needs at least one row of length k = {}",
                        spec.k
                    )));
                }
                Ok(DMatrix::from_fn(nr, spec.k, |i, j| rows[i][j]))
            })
            .collect::<Result<Vec<_>>>()?;
        BLDatum::new(spec.k, maps, spec.exps)
    }
}

impl From<BLDatum> for DatumSpec {
    fn from(d: BLDatum) -> Self {
        DatumSpec {
            k: d.k,
            maps: d
                .maps
                .iter()
                .map(matrix_rows)
                .collect(),
            exps: d.exps,
        }
    }
}

fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > tol)
        .count()
}

fn deletion_matrix(k: usize, deleted: &[usize]) -> DMatrix<f64> {
    let kept: Vec<usize> = (0..k).filter(|i| !deleted.contains(i)).collect();
    DMatrix::from_fn(kept.len(), k, |r, c| if kept[r] == c { 1.0 } else { 0.0 })
}

impl BLDatum {
    pub fn new(k: usize, maps: Vec<DMatrix<f64>>, exps: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDatum("ambient dimension must be positive".into()));
        }
        if maps.is_empty() || maps.len() != exps.len() {
            return Err(Error::InvalidDatum(format!(
                "need m ≥ 1 maps with one exponent each, got {} maps and {} exponents",
                maps.len(),
                exps.len()
            )));
        }
        for (j, (l, q)) in maps.iter().zip(&exps).enumerate() {
            if l.ncols() != k || l.nrows() == 0 || l.nrows() > k {
                return Err(Error::InvalidDatum(format!(
                    "map {j} has shape {}x{}, expected k_j x {k} with 1 ≤ k_j ≤ {k}",
                    l.nrows(),
                    l.ncols()
                )));
            }
            if l.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDatum(format!("map {j} has non-finite entries")));
            }
            if rank(l, RANK_TOL) != l.nrows() {
                return Err(Error::InvalidDatum(format!("map {j} is not surjective")));
            }
            if !(q.is_finite() && *q >= 0.0) {
                return Err(Error::InvalidDatum(format!("exponent {j} must be ≥ 0, got {q}")));
            }
        }
        Ok(BLDatum { k, maps, exps })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("datum serializes")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[DMatrix<f64>] {
        &self.maps
    }

    pub fn exps(&self) -> &[f64] {
        &self.exps
    }

    /// Target dimensions `k_j`.
    pub fn target_dims(&self) -> Vec<usize> {
        self.maps.iter().map(|l| l.nrows()).collect()
    }

    /// `k = Σ q_j k_j`.
    pub fn check_scaling(&self) -> bool {
        let s: f64 = self
            .maps
            .iter()
            .zip(&self.exps)
            .map(|(l, q)| q * l.nrows() as f64)
            .sum();
        (s - self.k as f64).abs() <= 1e-12 * (self.k as f64).max(1.0)
    }

    /// `L_j L_jᵀ = Id` for all `j` and `Σ q_j L_jᵀ L_j = Id`, entrywise within `1e-10`.
    pub fn check_geometric(&self) -> bool {
        let tol = 1e-10;
        let mut acc = DMatrix::zeros(self.k, self.k);
        for (l, q) in self.maps.iter().zip(&self.exps) {
            let llt = l * l.transpose();
            let id = DMatrix::<f64>::identity(l.nrows(), l.nrows());
            if (llt - id).amax() > tol {
                return false;
            }
            acc += *q * l.transpose() * l;
        }
        (acc - DMatrix::<f64>::identity(self.k, self.k)).amax() <= tol
    }

    /// Tests `dim V ≤ Σ q_j dim(L_j V)` on the given subspaces (columns span `V`)
    /// and on `extra_random` random subspaces; returns the violating ones.
    ///
    /// This samples a necessary condition, it does not decide it.
    pub fn check_dimension_sampled(
        &self,
        subspaces: &[DMatrix<f64>],
        extra_random: usize,
        seed: u64,
    ) -> Vec<DMatrix<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut all: Vec<DMatrix<f64>> = subspaces
            .iter()
            .filter(|v| v.nrows() == self.k && v.ncols() > 0)
            .cloned()
            .collect();
        for _ in 0..extra_random {
            let dim = rng.random_range(1..=self.k);
            all.push(DMatrix::from_fn(self.k, dim, |_, _| rng.sample(StandardNormal)));
        }
        all.into_iter().filter(|v| self.violates_dimension(v)).collect()
    }

    fn violates_dimension(&self, v: &DMatrix<f64>) -> bool {
        let dim = rank(v, RANK_TOL * v.amax().max(1.0));
        if dim == 0 {
            return false;
        }
        // orthonormal basis, so the rank tolerance does not depend on the spanning set
        let svd = v.clone().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let basis = u.columns(0, dim).into_owned();
        let rhs: f64 = self
            .maps
            .iter()
            .zip(&self.exps)
            .map(|(l, q)| q * rank(&(l * &basis), RANK_TOL * l.amax().max(1.0)) as f64)
            .sum();
        dim as f64 > rhs + 1e-12
    }

    /// All nonzero coordinate subspaces (for `k ≤ 12`) plus the kernels of the maps.
    pub fn structural_subspaces(&self) -> Vec<DMatrix<f64>> {
        let mut out = Vec::new();
        if self.k <= 12 {
            for mask in 1u32..(1 << self.k) {
                let cols: Vec<usize> = (0..self.k).filter(|i| mask >> i & 1 == 1).collect();
                out.push(DMatrix::from_fn(self.k, cols.len(), |r, c| {
                    if cols[c] == r {
                        1.0
                    } else {
                        0.0
                    }
                }));
            }
        }
        for l in &self.maps {
            if l.nrows() < self.k {
                // ker L is the range of the projector Id − Lᵀ (L Lᵀ)^{-1} L
                let Some(inv) = (l * l.transpose()).try_inverse() else {
                    continue;
                };
                let p = DMatrix::<f64>::identity(self.k, self.k) - l.transpose() * inv * l;
                let svd = p.svd(true, false);
                let u = svd.u.expect("left singular vectors requested");
                let cols: Vec<usize> = (0..self.k).filter(|&i| svd.singular_values[i] > 0.5).collect();
                if !cols.is_empty() {
                    out.push(u.select_columns(&cols));
                }
            }
        }
        out
    }

    fn accumulated(&self, mats: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(self.k, self.k);
        for ((l, q), a) in self.maps.iter().zip(&self.exps).zip(mats) {
            acc += *q * l.transpose() * a * l;
        }
        acc
    }

    /// `ln` of the Gaussian quotient; errors if the accumulated form is
    /// (numerically) singular.
    pub fn log_gaussian_quotient(&self, gin: &GaussianInput) -> Result<f64> {
        self.check_input_shapes(gin)?;
        let m = self.accumulated(&gin.mats);
        let ld = log_det_checked(&m)?;
        let mut num = 0.0;
        for (a, q) in gin.mats.iter().zip(&self.exps) {
            num += 0.5 * q * log_det_checked(a)?;
        }
        Ok(num - 0.5 * ld)
    }

    pub fn gaussian_quotient(&self, gin: &GaussianInput) -> Result<f64> {
        Ok(self.log_gaussian_quotient(gin)?.exp())
    }

    fn check_input_shapes(&self, gin: &GaussianInput) -> Result<()> {
        if gin.mats.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                got: gin.mats.len(),
            });
        }
        for (a, l) in gin.mats.iter().zip(&self.maps) {
            if a.nrows() != l.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: l.nrows(),
                    got: a.nrows(),
                });
            }
        }
        Ok(())
    }

    /// Estimates `BL(L, q)` by ascending the Gaussian quotient.
    ///
    /// Fails fast with [`BLOutcome::Infinite`] when the scaling condition fails
    /// or a sampled subspace violates the dimension condition.
    pub fn bl_constant(&self, opts: &BLOptions) -> BLOutcome {
        if !self.check_scaling() {
            let s: f64 = self
                .maps
                .iter()
                .zip(&self.exps)
                .map(|(l, q)| q * l.nrows() as f64)
                .sum();
            return BLOutcome::Infinite {
                reason: InfiniteReason::Scaling,
                detail: format!("k = {} but Σ q_j k_j = {s}", self.k),
            };
        }
        let bad = self.check_dimension_sampled(&self.structural_subspaces(), opts.dimension_samples, opts.seed);
        if let Some(v) = bad.first() {
            return BLOutcome::Infinite {
                reason: InfiniteReason::Dimension,
                detail: format!("dimension condition fails on a subspace of dimension {}", v.ncols()),
            };
        }
        let starts: Vec<Vec<f64>> = (0..opts.starts.max(1))
            .map(|s| self.start_params(s, opts.seed))
            .collect();
        let runs = par::map_slice(&starts, |x0| self.ascend(x0.clone(), opts));
        let mut best: Option<AscentRun> = None;
        for run in runs {
            match run {
                Err(detail) => {
                    return BLOutcome::Infinite {
                        reason: InfiniteReason::Divergent,
                        detail,
                    }
                }
                Ok(r) => {
                    if best.as_ref().is_none_or(|b| r.value > b.value) {
                        best = Some(r);
                    }
                }
            }
        }
        let best = best.expect("at least one start");
        let argmax = GaussianInput {
            mats: self.unpack(&best.params),
        };
        BLOutcome::Finite {
            estimate: best.value.exp(),
            argmax,
            converged: best.converged,
            history: best.history.iter().map(|v| v.exp()).collect(),
        }
    }

    fn n_params(&self) -> usize {
        self.maps.iter().map(|l| l.nrows() * (l.nrows() + 1) / 2).sum()
    }

    /// Start 0 is the identity; later starts are random log-Cholesky factors.
    fn start_params(&self, start: usize, seed: u64) -> Vec<f64> {
        let mut x = vec![0.0; self.n_params()];
        if start == 0 {
            return x;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (start as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        for v in &mut x {
            *v = 0.5 * rng.sample::<f64, _>(StandardNormal);
        }
        x
    }

    /// Cholesky factors from the flat parameter vector (row-major lower triangle,
    /// log-diagonal).
    fn factors(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        let mut pos = 0;
        self.maps
            .iter()
            .map(|l| {
                let n = l.nrows();
                let mut c = DMatrix::zeros(n, n);
                for r in 0..n {
                    for col in 0..=r {
                        c[(r, col)] = if r == col { x[pos].exp() } else { x[pos] };
                        pos += 1;
                    }
                }
                c
            })
            .collect()
    }

    fn unpack(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        self.factors(x).into_iter().map(|c| &c * c.transpose()).collect()
    }

    fn objective(&self, x: &[f64]) -> Result<f64> {
        let mats = self.unpack(x);
        let m = self.accumulated(&mats);
        let ld = log_det_checked(&m)?;
        // log det A_j = 2 Σ log-diag
        let mut pos = 0;
        let mut num = 0.0;
        for (l, q) in self.maps.iter().zip(&self.exps) {
            let n = l.nrows();
            for r in 0..n {
                pos += r;
                num += q * x[pos];
                pos += 1;
            }
        }
        Ok(num - 0.5 * ld)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let cs = self.factors(x);
        let mats: Vec<DMatrix<f64>> = cs.iter().map(|c| c * c.transpose()).collect();
        let m = self.accumulated(&mats);
        let minv = m
            .try_inverse()
            .ok_or(Error::Singular { condition: f64::INFINITY })?;
        let mut g = Vec::with_capacity(x.len());
        for ((l, q), (c, a)) in self.maps.iter().zip(&self.exps).zip(cs.iter().zip(&mats)) {
            let ainv = a
                .clone()
                .try_inverse()
                .ok_or(Error::Singular { condition: f64::INFINITY })?;
            // dF/dA_j = (q_j / 2)(A_j^{-1} − L_j M^{-1} L_jᵀ), dF/dC_j = 2 (dF/dA_j) C_j
            let ga = (*q * 0.5) * (ainv - l * &minv * l.transpose());
            let gc = 2.0 * ga * c;
            let n = l.nrows();
            for r in 0..n {
                for col in 0..=r {
                    g.push(if r == col { gc[(r, col)] * c[(r, col)] } else { gc[(r, col)] });
                }
            }
        }
        Ok(g)
    }

    /// Removes the common scale `A_j → s A_j`, which leaves the quotient unchanged
    /// under the scaling condition.
    fn normalize_scale(&self, x: &mut [f64]) {
        let mut diag = Vec::new();
        let mut pos = 0;
        for l in &self.maps {
            for r in 0..l.nrows() {
                pos += r;
                diag.push(pos);
                pos += 1;
            }
        }
        let mu = diag.iter().map(|&i| x[i]).sum::<f64>() / diag.len() as f64;
        let factor = (-mu).exp();
        for (i, v) in x.iter_mut().enumerate() {
            if diag.contains(&i) {
                *v -= mu;
            } else {
                *v *= factor;
            }
        }
    }

    fn ascend(&self, mut x: Vec<f64>, opts: &BLOptions) -> std::result::Result<AscentRun, String> {
        let mut f = match self.objective(&x) {
            Ok(f) => f,
            Err(_) => {
                // a singular start is skipped by reporting it as the worst value
                return Ok(AscentRun {
                    params: x,
                    value: f64::NEG_INFINITY,
                    converged: false,
                    history: vec![],
                });
            }
        };
        let mut history = vec![f];
        let mut step = opts.step;
        let mut converged = false;
        for _ in 0..opts.iters {
            let g = match self.gradient(&x) {
                Ok(g) => g,
                Err(_) => break,
            };
            let gg: f64 = g.iter().map(|v| v * v).sum();
            if gg.sqrt() <= opts.gtol {
                converged = true;
                break;
            }
            let mut accepted = false;
            while step > 1e-14 {
                let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
                self.normalize_scale(&mut y);
                if let Ok(fy) = self.objective(&y) {
                    if fy >= f + 1e-4 * step * gg {
                        x = y;
                        f = fy;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                converged = true;
                break;
            }
            history.push(f);
            if f > DIVERGENCE_LOG {
                return Err(format!(
                    "log quotient exceeded {DIVERGENCE_LOG}; the constant appears to be infinite"
                ));
            }
            step = (step * 2.0).min(opts.step * 1e3);
        }
        Ok(AscentRun {
            params: x,
            value: f,
            converged,
            history,
        })
    }
}

struct AscentRun {
    params: Vec<f64>,
    value: f64,
    converged: bool,
    history: Vec<f64>,
}

/// `ln det` of a symmetric positive-definite matrix, rejecting condition numbers
/// above [`MAX_CONDITION`].
fn log_det_checked(m: &DMatrix<f64>) -> Result<f64> {
    let eig = m.clone().symmetric_eigen();
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.max();
    if !(lo > 0.0) || hi / lo > MAX_CONDITION {
        return Err(Error::Singular {
            condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        });
    }
    Ok(eig.eigenvalues.iter().map(|v| v.ln()).sum())
}

/// Symmetric positive-definite matrices `A_j`, one per map.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "Vec<Vec<Vec<f64>>>")]
pub struct GaussianInput {
    mats: Vec<DMatrix<f64>>,
}

impl From<GaussianInput> for Vec<Vec<Vec<f64>>> {
    fn from(g: GaussianInput) -> Self {
        g.mats.iter().map(matrix_rows).collect()
    }
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl GaussianInput {
    pub fn new(mats: Vec<DMatrix<f64>>) -> Result<Self> {
        for (j, a) in mats.iter().enumerate() {
            if !a.is_square() || a.nrows() == 0 {
                return Err(Error::NotPositiveDefinite(format!("matrix {j} is not square")));
            }
            if (a - a.transpose()).amax() > 1e-12 {
                return Err(Error::NotPositiveDefinite(format!("matrix {j} is not symmetric")));
            }
            let lo = a.clone().symmetric_eigen().eigenvalues.min();
            if !(lo > 0.0) {
                return Err(Error::NotPositiveDefinite(format!(
                    "matrix {j} has minimum eigenvalue {lo}"
                )));
            }
        }
        Ok(GaussianInput { mats })
    }

    /// `A_j = Id_{k_j}` for every map of `datum`.
    pub fn identity(datum: &BLDatum) -> Self {
        GaussianInput {
            mats: datum
                .target_dims()
                .into_iter()
                .map(|n| DMatrix::identity(n, n))
                .collect(),
        }
    }

    pub fn mats(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        GaussianInput::new(self.mats.iter().map(|a| c * a).collect())
    }

    /// Evaluates `f_j(t) = exp(-π⟨A_j t, t⟩)`.
    pub fn eval(&self, j: usize, t: &[f64]) -> f64 {
        let v = DVector::from_column_slice(t);
        (-std::f64::consts::PI * (v.transpose() * &self.mats[j] * &v)[(0, 0)]).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BLOptions {
    pub iters: usize,
    /// Initial gradient step.
    pub step: f64,
    pub seed: u64,
    /// Number of starts; the first is always the identity.
    pub starts: usize,
    /// Gradient-norm stopping tolerance.
    pub gtol: f64,
    /// Random subspaces added to the structural ones for the dimension check.
    pub dimension_samples: usize,
}

impl Default for BLOptions {
    fn default() -> Self {
        BLOptions {
            iters: 2000,
            step: 0.5,
            seed: 0,
            starts: 4,
            gtol: 1e-10,
            dimension_samples: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InfiniteReason {
    /// `k ≠ Σ q_j k_j`.
    Scaling,
    /// A sampled subspace has `dim V > Σ q_j dim(L_j V)`.
    Dimension,
    /// The quotient grew without bound during the ascent.
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum BLOutcome {
    Finite {
        /// Best quotient found, a lower bound on `BL(L, q)`.
        estimate: f64,
        argmax: GaussianInput,
        converged: bool,
        /// Quotient after each accepted step of the winning start.
        history: Vec<f64>,
    },
    Infinite {
        reason: InfiniteReason,
        detail: String,
    },
}

impl BLOutcome {
    pub fn estimate(&self) -> f64 {
        match self {
            BLOutcome::Finite { estimate, .. } => *estimate,
            BLOutcome::Infinite { .. } => f64::INFINITY,
        }
    }
}

/// Loomis-Whitney datum on `ℝ^k`: the `k` coordinate deletions, `q_j = 1/(k-1)`.
pub fn lw_datum(k: usize) -> Result<BLDatum> {
    if k < 2 {
        return Err(Error::InvalidDatum(format!("Loomis-Whitney needs k ≥ 2, got {k}")));
    }
    let maps = (0..k).map(|j| deletion_matrix(k, &[j])).collect();
    BLDatum::new(k, maps, vec![1.0 / (k - 1) as f64; k])
}

/// Deletions of the coordinate pairs `{2j-1, 2j}` of `ℝ^{2n}`, `q_j = 1/(n-1)`.
pub fn pair_deletion_datum(n: usize) -> Result<BLDatum> {
    if n < 2 {
        return Err(Error::InvalidDatum(format!("pair deletion needs n ≥ 2, got {n}")));
    }
    let k = 2 * n;
    let maps = (0..n).map(|j| deletion_matrix(k, &[2 * j, 2 * j + 1])).collect();
    BLDatum::new(k, maps, vec![1.0 / (n - 1) as f64; n])
}

/// Differentials at the identity of the projections of `G`: the `d+2n+1`
/// coordinate deletions of `ℝ^{d+2n+1}` with `q_j = 1/(d+2n)`.
pub fn corank_linearized_datum(g: &CorankGroup) -> Result<BLDatum> {
    let k = g.topo_dim();
    let maps = (0..k).map(|j| deletion_matrix(k, &[j])).collect();
    BLDatum::new(k, maps, vec![1.0 / g.horizontal_dim() as f64; k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts() -> BLOptions {
        BLOptions::default()
    }

    #[test]
    fn scaling_examples() {
        assert!(lw_datum(3).unwrap().check_scaling());
        let g = CorankGroup::new(1, vec![1.0, 2.0]).unwrap();
        assert!(corank_linearized_datum(&g).unwrap().check_scaling());
        let d = lw_datum(3).unwrap();
        let doubled = BLDatum::new(3, d.maps().to_vec(), vec![1.0; 3]).unwrap();
        assert!(!doubled.check_scaling());
    }

    #[test]
    fn geometric_examples() {
        for k in 2..6 {
            assert!(lw_datum(k).unwrap().check_geometric());
        }
        for n in 2..5 {
            assert!(pair_deletion_datum(n).unwrap().check_geometric());
        }
        assert!(corank_linearized_datum(&CorankGroup::heisenberg(1).unwrap())
            .unwrap()
            .check_geometric());
        let mut maps = lw_datum(3).unwrap().maps().to_vec();
        maps[0][(0, 1)] = 2.0;
        assert!(!BLDatum::new(3, maps, vec![0.5; 3]).unwrap().check_geometric());
        assert!(lw_datum(1).is_err());
        assert!(pair_deletion_datum(1).is_err());
    }

    #[test]
    fn canonical_shapes() {
        let d = lw_datum(3).unwrap();
        assert_eq!((d.m(), d.target_dims(), d.exps()), (3, vec![2, 2, 2], &[0.5, 0.5, 0.5][..]));
        let p = pair_deletion_datum(2).unwrap();
        assert_eq!((p.k(), p.target_dims(), p.exps()), (4, vec![2, 2], &[1.0, 1.0][..]));
        let c = corank_linearized_datum(&CorankGroup::heisenberg(1).unwrap()).unwrap();
        assert_eq!((c.m(), c.target_dims(), c.exps()), (3, vec![2, 2, 2], &[0.5, 0.5, 0.5][..]));
    }

    #[test]
    fn invalid_data_are_rejected() {
        let rank_deficient = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!(BLDatum::new(3, vec![rank_deficient], vec![1.0]).is_err());
        assert!(BLDatum::new(3, vec![DMatrix::identity(3, 3)], vec![-1.0]).is_err());
        assert!(BLDatum::new(3, vec![DMatrix::identity(3, 3)], vec![]).is_err());
        assert!(BLDatum::from_json(r#"{"k":2,"maps":[[[1.0]]],"exps":[1.0]}"#).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = lw_datum(3).unwrap();
        assert_eq!(BLDatum::from_json(&d.to_json()).unwrap(), d);
        let d = BLDatum::from_json(r#"{"k":3,"maps":[[[1,0,0],[0,1,0]],[[0,1,0],[0,0,1]],[[1,0,0],[0,0,1]]],"exps":[0.5,0.5,0.5]}"#).unwrap();
        assert!(d.check_geometric());
    }

    #[test]
    fn dimension_condition_examples() {
        let d = lw_datum(3).unwrap();
        let coords = d.structural_subspaces();
        assert!(coords.len() >= 7);
        assert!(d.check_dimension_sampled(&coords, 0, 0).is_empty());

        // single-coordinate maps with Σq = 1 < k fail on V = ℝ²
        let maps = vec![
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
        ];
        let bad = BLDatum::new(2, maps, vec![0.5, 0.5]).unwrap();
        let v = vec![DMatrix::identity(2, 2)];
        assert_eq!(bad.check_dimension_sampled(&v, 0, 0).len(), 1);

        assert!(pair_deletion_datum(3)
            .unwrap()
            .check_dimension_sampled(&[], 1000, 7)
            .is_empty());
    }

    #[test]
    fn quotient_examples() {
        let d = lw_datum(3).unwrap();
        let id = GaussianInput::identity(&d);
        assert!((d.gaussian_quotient(&id).unwrap() - 1.0).abs() < 1e-15);
        let two = id.scaled(2.0).unwrap();
        // numerator 4^{3/4}, denominator det(2 Id_3)^{1/2} = 2^{3/2}
        assert!((d.gaussian_quotient(&two).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quotient_matches_quadrature() {
        // both sides of the BL inequality for Gaussian inputs on a grid
        let d = lw_datum(3).unwrap();
        let a1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let gin = GaussianInput::new(vec![a1, DMatrix::identity(2, 2), DMatrix::identity(2, 2)]).unwrap();
        let n = 128;
        let half = 3.5;
        let h = 2.0 * half / n as f64;
        let mid = |i: usize| -half + (i as f64 + 0.5) * h;
        let lhs: f64 = par::sum(n * n * n, |c| {
            let (i, j, k) = (c / (n * n), (c / n) % n, c % n);
            let x = [mid(i), mid(j), mid(k)];
            // ∏ f_j(L_j x)^{q_j} with q_j = 1/2
            (gin.eval(0, &[x[1], x[2]]) * gin.eval(1, &[x[0], x[2]]) * gin.eval(2, &[x[0], x[1]])).sqrt()
        }) * h * h * h;
        let mut rhs = 1.0;
        for j in 0..3 {
            let integral: f64 = (0..n * n).map(|c| gin.eval(j, &[mid(c / n), mid(c % n)])).sum::<f64>() * h * h;
            rhs *= integral.powf(0.5);
        }
        let q = d.gaussian_quotient(&gin).unwrap();
        assert!((lhs / rhs - q).abs() < 1e-3, "{} vs {q}", lhs / rhs);
    }

    #[test]
    fn singular_form_is_reported() {
        let maps = vec![DMatrix::from_row_slice(1, 2, &[1.0, 0.0])];
        let d = BLDatum::new(2, maps, vec![2.0]).unwrap();
        let gin = GaussianInput::identity(&d);
        assert!(matches!(d.gaussian_quotient(&gin), Err(Error::Singular { .. })));
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.5, 0.0, 0.0, 1.0, -0.3]);
        let b = DMatrix::from_row_slice(1, 3, &[0.2, -1.0, 1.0]);
        let d = BLDatum::new(3, vec![a, b], vec![1.0, 1.0]).unwrap();
        let x: Vec<f64> = (0..d.n_params()).map(|i| 0.1 * i as f64 - 0.2).collect();
        let g = d.gradient(&x).unwrap();
        for i in 0..x.len() {
            let h = 1e-6;
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let fd = (d.objective(&xp).unwrap() - d.objective(&xm).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6, "param {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn geometric_constants_are_one() {
        for d in [
            lw_datum(3).unwrap(),
            pair_deletion_datum(2).unwrap(),
            corank_linearized_datum(&CorankGroup::heisenberg(1).unwrap()).unwrap(),
        ] {
            let out = d.bl_constant(&opts());
            assert!((out.estimate() - 1.0).abs() < 1e-6, "{out:?}");
        }
    }

    #[test]
    fn holder_constant_is_one() {
        let id = DMatrix::identity(1, 1);
        for q in [0.5, 0.3, 0.9] {
            let d = BLDatum::new(1, vec![id.clone(), id.clone()], vec![q, 1.0 - q]).unwrap();
            let out = d.bl_constant(&opts());
            assert!((out.estimate() - 1.0).abs() < 1e-6, "q = {q}: {out:?}");
        }
    }

    #[test]
    fn scaled_holder_has_known_constant() {
        // f_1(2x)^{1/2} f_2(x)^{1/2}: the constant is 2^{-1/2}
        let d = BLDatum::new(
            1,
            vec![DMatrix::from_element(1, 1, 2.0), DMatrix::from_element(1, 1, 1.0)],
            vec![0.5, 0.5],
        )
        .unwrap();
        let out = d.bl_constant(&opts());
        assert!((out.estimate() - 0.5f64.sqrt()).abs() < 1e-6, "{out:?}");
        assert!(!d.check_geometric());
    }

    #[test]
    fn scaling_failure_is_infinite() {
        let d = lw_datum(3).unwrap();
        let bad = BLDatum::new(3, d.maps().to_vec(), vec![1.0; 3]).unwrap();
        assert!(matches!(
            bad.bl_constant(&opts()),
            BLOutcome::Infinite { reason: InfiniteReason::Scaling, .. }
        ));
    }

    #[test]
    fn dimension_failure_is_infinite() {
        // scaling holds (2 = 2·1) but V = span(e_1) has dim 1 > 2·dim(L V) = 0
        let d = BLDatum::new(2, vec![DMatrix::from_row_slice(1, 2, &[0.0, 1.0])], vec![2.0]).unwrap();
        assert!(d.check_scaling());
        assert!(matches!(
            d.bl_constant(&opts()),
            BLOutcome::Infinite { reason: InfiniteReason::Dimension, .. }
        ));
    }

    #[test]
    fn best_so_far_is_monotone() {
        let maps = vec![
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
        ];
        let d = BLDatum::new(2, maps, vec![2.0 / 3.0; 3]).unwrap();
        let out = d.bl_constant(&BLOptions { starts: 3, ..opts() });
        match out {
            BLOutcome::Finite { history, estimate, .. } => {
                assert!(history.windows(2).all(|w| w[1] >= w[0]));
                assert!(estimate.is_finite() && estimate > 0.0);
            }
            other => panic!("expected finite, got {other:?}"),
        }
    }

    fn arb_spd(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
            let b = DMatrix::from_vec(n, n, v);
            &b * b.transpose() + DMatrix::identity(n, n) * 0.2
        })
    }

    proptest! {
        #[test]
        fn quotient_is_scale_invariant(a in arb_spd(2), b in arb_spd(2), c in arb_spd(2), s in 0.05f64..20.0) {
            let d = lw_datum(3).unwrap();
            let gin = GaussianInput::new(vec![a, b, c]).unwrap();
            let q1 = d.gaussian_quotient(&gin).unwrap();
            let q2 = d.gaussian_quotient(&gin.scaled(s).unwrap()).unwrap();
            prop_assert!((q1 - q2).abs() < 1e-10 * q1.max(1.0));
        }

        #[test]
        fn geometric_quotient_is_at_most_one(a in arb_spd(2), b in arb_spd(2), c in arb_spd(2)) {
            let d = lw_datum(3).unwrap();
            let gin = GaussianInput::new(vec![a, b, c]).unwrap();
            prop_assert!(d.gaussian_quotient(&gin).unwrap() <= 1.0 + 1e-12);
        }
    }
}
