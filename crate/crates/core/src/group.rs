//! Corank-1 Carnot groups `H(d, α)`.
//!
//! Points are stored as `(x, t)` with `x ∈ ℝ^{d+2n}` laid out as
//! `x_1..x_d` (the commuting directions) followed by the `n` symplectic pairs
//! `(x_{d+2i-1}, x_{d+2i})`, and `t` the center coordinate. The group law is
//!
//! ```text
//! (x, t)·(x', t') = (x + x', t + t' + ½ Σ_i α_i (x_{d+2i-1} x'_{d+2i} − x_{d+2i} x'_{d+2i-1}))
//! ```
//!
//! Projection indices `j` are 1-based and run over `1..=d+2n+1`, the last one
//! being the projection along the center.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GroupSpec", into = "GroupSpec")]
pub struct CorankGroup {
    d: usize,
    alpha: Vec<f64>,
}

/// Wire form `{"d":1,"n":2,"alpha":[1.0,2.0]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GroupSpec {
    d: usize,
    n: usize,
    alpha: Vec<f64>,
}

impl TryFrom<GroupSpec> for CorankGroup {
    type Error = Error;

    fn try_from(spec: GroupSpec) -> Result<Self> {
        if spec.alpha.len() != spec.n {
            return Err(Error::InvalidGroup(format!(
                "n = {} but alpha has {} entries",
                spec.n,
                spec.alpha.len()
            )));
        }
        CorankGroup::new(spec.d, spec.alpha)
    }
}

impl From<CorankGroup> for GroupSpec {
    fn from(g: CorankGroup) -> Self {
        GroupSpec {
            d: g.d,
            n: g.alpha.len(),
            alpha: g.alpha,
        }
    }
}

/// How the `j`-th projection acts on coordinates (0-based axes of `x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    /// `j ≤ d`: delete the commuting coordinate `axis`, keep `t`.
    Commuting { axis: usize },
    /// First member of pair `pair`: delete `axis`, `t ↦ t + (α/2) x_a x_b`.
    PairFirst { pair: usize, axis: usize },
    /// Second member of pair `pair`: delete `axis`, `t ↦ t − (α/2) x_a x_b`.
    PairSecond { pair: usize, axis: usize },
    /// `j = d+2n+1`: forget `t`.
    Center,
}

impl ProjectionKind {
    /// The deleted `x` axis, if any.
    pub fn deleted_axis(self) -> Option<usize> {
        match self {
            ProjectionKind::Commuting { axis }
            | ProjectionKind::PairFirst { axis, .. }
            | ProjectionKind::PairSecond { axis, .. } => Some(axis),
            ProjectionKind::Center => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub x: Vec<f64>,
    pub t: f64,
}

impl GroupPoint {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        GroupPoint { x, t }
    }

    /// Builds a point from `d+2n+1` coordinates, the last one being `t`.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        let (t, x) = coords
            .split_last()
            .ok_or(Error::DimensionMismatch { expected: 1, got: 0 })?;
        Ok(GroupPoint::new(x.to_vec(), *t))
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.x.clone();
        c.push(self.t);
        c
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().all(|v| v.is_finite())
    }

    fn max_abs(&self) -> f64 {
        self.x.iter().fold(self.t.abs(), |m, v| m.max(v.abs()))
    }
}

/// Horizontal derivatives `(X_1 f, …, X_{d+2n} f)` plus the center derivative `T f`.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalGradient {
    pub horizontal: Vec<f64>,
    pub vertical: f64,
}

impl HorizontalGradient {
    pub fn norm(&self) -> f64 {
        self.horizontal.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl CorankGroup {
    /// `H(d, α)`; requires `α` nonempty, positive and nondecreasing.
    pub fn new(d: usize, alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidGroup("n must be at least 1".into()));
        }
        if alpha.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(Error::InvalidGroup(format!(
                "alpha must satisfy 0 < alpha_1 <= ... <= alpha_n < inf, got {alpha:?}"
            )));
        }
        if alpha.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidGroup(format!(
                "alpha must be nondecreasing (0 < alpha_1 <= ... <= alpha_n), got {alpha:?}"
            )));
        }
        Ok(CorankGroup { d, alpha })
    }

    /// The Heisenberg group `H^n = H(0, (1, …, 1))`.
    pub fn heisenberg(n: usize) -> Result<Self> {
        CorankGroup::new(0, vec![1.0; n])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("group serializes")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `d + 2n`, the dimension of the horizontal layer.
    pub fn horizontal_dim(&self) -> usize {
        self.d + 2 * self.n()
    }

    /// `d + 2n + 1`.
    pub fn topo_dim(&self) -> usize {
        self.horizontal_dim() + 1
    }

    /// Homogeneous dimension `Q = d + 2n + 2`.
    pub fn homogeneous_dim(&self) -> usize {
        self.topo_dim() + 1
    }

    /// Number of projections `π_1..π_{d+2n+1}`.
    pub fn num_projections(&self) -> usize {
        self.topo_dim()
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::new(vec![0.0; self.horizontal_dim()], 0.0)
    }

    /// The axes `(a, b)` of pair `i` (0-based).
    pub fn pair_axes(&self, pair: usize) -> (usize, usize) {
        (self.d + 2 * pair, self.d + 2 * pair + 1)
    }

    pub fn projection_kind(&self, j: usize) -> Result<ProjectionKind> {
        let max = self.num_projections();
        if j == 0 || j > max {
            return Err(Error::InvalidProjection { j, max });
        }
        let axis = j - 1;
        Ok(if j == max {
            ProjectionKind::Center
        } else if axis < self.d {
            ProjectionKind::Commuting { axis }
        } else {
            let pair = (axis - self.d) / 2;
            if (axis - self.d).is_multiple_of(2) {
                ProjectionKind::PairFirst { pair, axis }
            } else {
                ProjectionKind::PairSecond { pair, axis }
            }
        })
    }

    /// Signed center shift applied by projection `kind` at horizontal point `x`.
    pub fn shear(&self, kind: ProjectionKind, x: &[f64]) -> f64 {
        match kind {
            ProjectionKind::PairFirst { pair, .. } => {
                let (a, b) = self.pair_axes(pair);
                0.5 * self.alpha[pair] * x[a] * x[b]
            }
            ProjectionKind::PairSecond { pair, .. } => {
                let (a, b) = self.pair_axes(pair);
                -0.5 * self.alpha[pair] * x[a] * x[b]
            }
            _ => 0.0,
        }
    }

    fn check(&self, p: &GroupPoint) -> Result<()> {
        if p.x.len() != self.horizontal_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.horizontal_dim(),
                got: p.x.len(),
            });
        }
        Ok(())
    }

    /// `½ Σ α_i (x_a x'_b − x_b x'_a)`.
    fn twist(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, &a) in self.alpha.iter().enumerate() {
            let (ia, ib) = self.pair_axes(i);
            s += a * (x[ia] * y[ib] - x[ib] * y[ia]);
        }
        0.5 * s
    }

    pub fn multiply(&self, p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
        self.check(p)?;
        self.check(q)?;
        let x = p.x.iter().zip(&q.x).map(|(a, b)| a + b).collect();
        Ok(GroupPoint::new(x, p.t + q.t + self.twist(&p.x, &q.x)))
    }

    pub fn inverse(&self, p: &GroupPoint) -> GroupPoint {
        GroupPoint::new(p.x.iter().map(|v| -v).collect(), -p.t)
    }

    /// `δ_r(x, t) = (r x, r² t)`.
    pub fn dilate(&self, r: f64, p: &GroupPoint) -> Result<GroupPoint> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveScale(r));
        }
        self.check(p)?;
        Ok(GroupPoint::new(
            p.x.iter().map(|v| r * v).collect(),
            r * r * p.t,
        ))
    }

    /// The one-parameter subgroup element `ℓ e_j` (`e_{d+2n+1}` is the `t` axis).
    pub fn generator(&self, j: usize, ell: f64) -> Result<GroupPoint> {
        let kind = self.projection_kind(j)?;
        let mut p = self.identity();
        match kind.deleted_axis() {
            Some(axis) => p.x[axis] = ell,
            None => p.t = ell,
        }
        Ok(p)
    }

    /// `π_j(x, t) ∈ ℝ^{d+2n}`; for `j ≤ d+2n` the last entry is the sheared center.
    pub fn project(&self, j: usize, p: &GroupPoint) -> Result<Vec<f64>> {
        self.check(p)?;
        let kind = self.projection_kind(j)?;
        Ok(match kind.deleted_axis() {
            None => p.x.clone(),
            Some(axis) => {
                let mut y = Vec::with_capacity(self.horizontal_dim());
                y.extend(p.x.iter().enumerate().filter(|(i, _)| *i != axis).map(|(_, v)| *v));
                y.push(p.t + self.shear(kind, &p.x));
                y
            }
        })
    }

    /// Splits `p = base · ℓ e_j` with `base ∈ J_j` (`x_j = 0`, or `t = 0` for the center).
    pub fn decompose(&self, j: usize, p: &GroupPoint) -> Result<(GroupPoint, f64)> {
        self.check(p)?;
        let kind = self.projection_kind(j)?;
        let ell = match kind.deleted_axis() {
            Some(axis) => p.x[axis],
            None => p.t,
        };
        let mut base = self.multiply(p, &self.generator(j, -ell)?)?;
        // exact zero rather than a rounding residue
        match kind.deleted_axis() {
            Some(axis) => base.x[axis] = 0.0,
            None => base.t = 0.0,
        }
        Ok((base, ell))
    }

    /// The induced dilation `δ_r^{(j)}` on `ℝ^{d+2n}` with `δ_r^{(j)} ∘ π_j = π_j ∘ δ_r`.
    pub fn projected_dilate(&self, j: usize, r: f64, y: &[f64]) -> Result<Vec<f64>> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveScale(r));
        }
        if y.len() != self.horizontal_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.horizontal_dim(),
                got: y.len(),
            });
        }
        let kind = self.projection_kind(j)?;
        Ok(match kind {
            ProjectionKind::Center => y.iter().map(|v| r * v).collect(),
            _ => {
                let last = y.len() - 1;
                y.iter()
                    .enumerate()
                    .map(|(i, v)| if i == last { r * r * v } else { r * v })
                    .collect()
            }
        })
    }

    /// Per-axis scale exponents of `δ_r^{(j)}`: `1` for inherited `x` axes, `2` for the center.
    pub fn projected_dilation_exponents(&self, j: usize) -> Result<Vec<u32>> {
        let kind = self.projection_kind(j)?;
        let m = self.horizontal_dim();
        Ok(match kind {
            ProjectionKind::Center => vec![1; m],
            _ => (0..m).map(|i| if i + 1 == m { 2 } else { 1 }).collect(),
        })
    }

    /// Coefficient `c` in `X_i = ∂_{x_i} + c(x) ∂_t`.
    pub fn vector_field_coefficient(&self, axis: usize, x: &[f64]) -> f64 {
        if axis < self.d {
            return 0.0;
        }
        let pair = (axis - self.d) / 2;
        let (a, b) = self.pair_axes(pair);
        if axis == a {
            -0.5 * self.alpha[pair] * x[b]
        } else {
            0.5 * self.alpha[pair] * x[a]
        }
    }

    /// Default finite-difference step `1e-5 · max(1, |p|_∞)`.
    pub fn default_step(p: &GroupPoint) -> f64 {
        1e-5 * p.max_abs().max(1.0)
    }

    /// Central-difference horizontal gradient of `f` at `p`.
    ///
    /// Uses the explicit fields `X_{d+2i-1} = ∂_{x_{d+2i-1}} − (α_i/2) x_{d+2i} ∂_t`,
    /// `X_{d+2i} = ∂_{x_{d+2i}} + (α_i/2) x_{d+2i-1} ∂_t`, `X_i = ∂_{x_i}` for `i ≤ d`.
    pub fn horizontal_gradient<F>(&self, f: F, p: &GroupPoint, h: f64) -> Result<HorizontalGradient>
    where
        F: Fn(&GroupPoint) -> f64,
    {
        self.check(p)?;
        if !(h > 0.0) {
            return Err(Error::NonPositiveScale(h));
        }
        let mut q = p.clone();
        q.t = p.t + h;
        let fp = f(&q);
        q.t = p.t - h;
        let fm = f(&q);
        let dt = (fp - fm) / (2.0 * h);
        q.t = p.t;

        let mut horizontal = Vec::with_capacity(self.horizontal_dim());
        for axis in 0..self.horizontal_dim() {
            q.x[axis] = p.x[axis] + h;
            let fp = f(&q);
            q.x[axis] = p.x[axis] - h;
            let fm = f(&q);
            q.x[axis] = p.x[axis];
            let dx = (fp - fm) / (2.0 * h);
            horizontal.push(dx + self.vector_field_coefficient(axis, &p.x) * dt);
        }
        Ok(HorizontalGradient {
            horizontal,
            vertical: dt,
        })
    }
}
