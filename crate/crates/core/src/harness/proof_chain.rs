//! The entropy inequalities chained in the proof of the main theorem on `H(0, α)`.

use std::collections::BTreeMap;

use serde_json::json;

use super::constants::corank_constants;
use super::{tolerance, Report};
use crate::density::{mass_entropy, pushforward_entropy, Axis, GridSource, ProceduralDensity, ProjectionPlan};
use crate::error::{Error, Result};
use crate::group::CorankGroup;

/// Reports of every step plus the entropies they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofChain {
    pub reports: Vec<Report>,
    /// Steps that could not run, with the reason.
    pub notes: Vec<String>,
    pub entropies: BTreeMap<String, f64>,
}

impl ProofChain {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn report(&self, name: &str) -> Option<&Report> {
        self.reports.iter().find(|r| r.name == name)
    }
}

/// Runs the steps on `(X, T) ~ f / ∫f`, where `X^j` drops pair `j` from `X`:
///
/// - `main1-j`: `S(π_{2j−1}) + S(π_{2j}) ≤ ½S(X^j) + (3/2)S(X,T) + (3/2)ln‖R‖ − ½ln α_j`
/// - `main2`: the sum of `main1-j` over `j`
/// - `main3`: `Σ_j S(X^j) ≤ (n−1)S(X)` (needs `n ≥ 2`)
/// - `main4`: `Σ_{j ≤ 2n+1} S(π_j) ≤ 2n S(X,T)`
/// - `target`: `Σ_{j ≤ 2n} c_j S(π_j) ≤ S(X,T) + ln C(0,α)`
///
/// `main1` is checked in integrated form; the per-fiber inequalities behind it
/// are not reported.
pub fn proof_chain_checks<S: GridSource + ?Sized>(g: &CorankGroup, f: &S, r_norm: f64) -> Result<ProofChain> {
    if g.d() != 0 {
        return Err(Error::InvalidGroup(format!(
            "the proof chain runs on H(0, α), got d = {}",
            g.d()
        )));
    }
    let n = g.n();
    let (_, s_xt) = mass_entropy(f)?;
    let mut s_pi: Vec<f64> = (1..=2 * n)
        .map(|j| Ok(pushforward_entropy(g, j, f)?.1))
        .collect::<Result<_>>()?;
    let xm = ProjectionPlan::new(g, 2 * n + 1, f.axes())?
        .materialize(f)?
        .normalize()?;
    let s_x = xm.entropy()?;
    s_pi.push(s_x);
    let mut notes = Vec::new();
    let s_xj: Vec<f64> = if n == 1 {
        notes.push("n = 1: X^1 is empty, S(X^1) = 0 and main3 is skipped".to_string());
        vec![0.0]
    } else {
        (0..n)
            .map(|j| {
                let kept: Vec<usize> = (0..2 * n).filter(|&i| i / 2 != j).collect();
                xm.marginal(&kept)?.entropy()
            })
            .collect::<Result<_>>()?
    };

    let h = f.axes().iter().map(Axis::h).fold(0.0, f64::max);
    let ln_r = r_norm.ln();
    let mut entropies = BTreeMap::new();
    entropies.insert("S(X,T)".to_string(), s_xt);
    entropies.insert("S(X)".to_string(), s_x);
    for (j, s) in s_pi.iter().enumerate() {
        entropies.insert(format!("S(pi_{})", j + 1), *s);
    }
    if n > 1 {
        for (j, s) in s_xj.iter().enumerate() {
            entropies.insert(format!("S(X^{})", j + 1), *s);
        }
    }
    let meta = json!(entropies);
    let mut reports = Vec::new();

    for j in 0..n {
        let lhs = s_pi[2 * j] + s_pi[2 * j + 1];
        let rhs = 0.5 * s_xj[j] + 1.5 * s_xt + 1.5 * ln_r - 0.5 * g.alpha()[j].ln();
        reports.push(Report::new(format!("main1-{}", j + 1), lhs, rhs, tolerance::entropy(h, 4.0)));
    }
    let lhs: f64 = s_pi[..2 * n].iter().sum();
    let rhs = 0.5 * s_xj.iter().sum::<f64>() + 1.5 * n as f64 * (s_xt + ln_r)
        - 0.5 * g.alpha().iter().map(|a| a.ln()).sum::<f64>();
    reports.push(Report::new("main2", lhs, rhs, tolerance::entropy(h, 4.0 * n as f64)));
    if n > 1 {
        let lhs: f64 = s_xj.iter().sum();
        let rhs = (n - 1) as f64 * s_x;
        reports.push(Report::new("main3", lhs, rhs, tolerance::entropy(h, 2.0 * n as f64)));
    }
    let lhs: f64 = s_pi.iter().sum();
    reports.push(Report::new("main4", lhs, 2.0 * n as f64 * s_xt, tolerance::entropy(h, 4.0 * n as f64 + 1.0)));
    let sd = corank_constants(g);
    let lhs: f64 = s_pi[..2 * n].iter().zip(sd.c_f64()).map(|(s, c)| s * c).sum();
    let rhs = s_xt + sd.d().value(r_norm);
    reports.push(Report::new("target", lhs, rhs, tolerance::entropy(h, 3.0)));

    let reports = reports
        .into_iter()
        .map(|r| {
            r.with("entropies", meta.clone())
                .with("r_norm", r_norm)
                .with("res", json!(f.axes().iter().map(|a| a.res).collect::<Vec<_>>()))
        })
        .collect();
    Ok(ProofChain {
        reports,
        notes,
        entropies,
    })
}

/// `exp(−|x|²/(2σ²) − t²/(2σ_t²))` on `[-half, half]^{2n+1}`, evaluated row by row.
#[allow(clippy::type_complexity)]
pub fn proof_chain_source(
    g: &CorankGroup,
    res: usize,
    half: f64,
    sigma: f64,
    sigma_t: f64,
) -> Result<ProceduralDensity<impl Fn(&[f64], &Axis, &mut [f64]) + Sync>> {
    if !(sigma > 0.0 && sigma_t > 0.0) {
        return Err(Error::NonPositiveScale(sigma.min(sigma_t)));
    }
    let k = g.topo_dim();
    let axis = Axis::centered(half, res)?;
    let profile: Vec<f64> = axis
        .mids()
        .iter()
        .map(|t| (-0.5 * t * t / (sigma_t * sigma_t)).exp())
        .collect();
    ProceduralDensity::new(vec![axis; k], move |x: &[f64], _: &Axis, out: &mut [f64]| {
        let x2: f64 = x.iter().map(|v| v * v).sum();
        let a = (-0.5 * x2 / (sigma * sigma)).exp();
        for (o, p) in out.iter_mut().zip(&profile) {
            *o = a * p;
        }
    })
}
