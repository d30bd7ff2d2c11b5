//! Exponents and log-constants of multilinear and entropy inequalities.
//!
//! Weights `c_j` are exact rationals. The log-constant `D` is kept as a linear
//! form `a·ln‖R‖ + Σ b_i ln α_i + offset` so that it can be printed symbolically
//! and evaluated for any configured `‖R‖`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::CorankGroup;

pub type Rational = Ratio<i64>;

fn rat(n: usize, d: usize) -> Rational {
    Rational::new(n as i64, d as i64)
}

fn rat_str(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `r_coeff·ln‖R‖ + Σ coeff·ln α + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogConstant {
    pub r_coeff: Rational,
    /// `(α, coefficient)`, one entry per distinct `α`.
    pub alpha_terms: Vec<(f64, Rational)>,
    pub offset: f64,
}

impl LogConstant {
    pub fn zero() -> Self {
        LogConstant {
            r_coeff: Rational::from_integer(0),
            alpha_terms: Vec::new(),
            offset: 0.0,
        }
    }

    pub fn value(&self, r_norm: f64) -> f64 {
        let r = *self.r_coeff.numer() as f64 / *self.r_coeff.denom() as f64;
        let a: f64 = self
            .alpha_terms
            .iter()
            .map(|(alpha, c)| *c.numer() as f64 / *c.denom() as f64 * alpha.ln())
            .sum();
        r * r_norm.ln() + a + self.offset
    }

    pub fn scale(&self, c: Rational) -> Self {
        LogConstant {
            r_coeff: self.r_coeff * c,
            alpha_terms: self.alpha_terms.iter().map(|(a, k)| (*a, k * c)).collect(),
            offset: self.offset * (*c.numer() as f64 / *c.denom() as f64),
        }
    }

    pub fn add(&self, other: &LogConstant) -> Self {
        let mut terms = self.alpha_terms.clone();
        for (a, k) in &other.alpha_terms {
            match terms.iter_mut().find(|(b, _)| b.to_bits() == a.to_bits()) {
                Some((_, c)) => *c += k,
                None => terms.push((*a, *k)),
            }
        }
        terms.retain(|(_, k)| *k.numer() != 0);
        LogConstant {
            r_coeff: self.r_coeff + other.r_coeff,
            alpha_terms: terms,
            offset: self.offset + other.offset,
        }
    }
}

impl fmt::Display for LogConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if *self.r_coeff.numer() != 0 {
            parts.push(format!("({}) ln R", rat_str(&self.r_coeff)));
        }
        for (a, k) in &self.alpha_terms {
            parts.push(format!("({}) ln {a}", rat_str(k)));
        }
        if self.offset != 0.0 || parts.is_empty() {
            parts.push(format!("{}", self.offset));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Weights `c_j` and log-constant `D` of `Σ c_j S(f_(p_j)) ≤ S(f) + D`,
/// equivalently `∫ ∏ f_j^{c_j}(p_j) ≤ e^D ∏ (∫ f_j)^{c_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledData {
    c: Vec<Rational>,
    d: LogConstant,
    q: Option<usize>,
}

impl ScaledData {
    /// Checks `c_j > 0` and, when `q` is given, `Σ c_j = Q/(Q-1)` exactly.
    pub fn new(c: Vec<Rational>, d: LogConstant, q: Option<usize>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidScaledData("no weights".into()));
        }
        if c.iter().any(|x| *x <= Rational::from_integer(0)) {
            return Err(Error::InvalidScaledData("weights must be positive".into()));
        }
        if let Some(q) = q {
            let sum: Rational = c.iter().sum();
            if q < 2 || sum != rat(q, q - 1) {
                return Err(Error::InvalidScaledData(format!(
                    "weights sum to {}, expected Q/(Q-1) with Q = {q}",
                    rat_str(&sum)
                )));
            }
        }
        Ok(ScaledData { c, d, q })
    }

    pub fn c(&self) -> &[Rational] {
        &self.c
    }

    pub fn c_f64(&self) -> Vec<f64> {
        self.c
            .iter()
            .map(|r| *r.numer() as f64 / *r.denom() as f64)
            .collect()
    }

    /// Lebesgue exponents `1/c_j`.
    pub fn exponents(&self) -> Vec<Rational> {
        self.c.iter().map(|r| r.recip()).collect()
    }

    pub fn d(&self) -> &LogConstant {
        &self.d
    }

    pub fn q(&self) -> Option<usize> {
        self.q
    }

    pub fn sum_c(&self) -> Rational {
        self.c.iter().sum()
    }

    pub fn to_json(&self, r_norm: f64) -> Value {
        let mut m = BTreeMap::new();
        m.insert("c", json!(self.c.iter().map(rat_str).collect::<Vec<_>>()));
        m.insert("c_float", json!(self.c_f64()));
        m.insert(
            "exponents",
            json!(self.exponents().iter().map(rat_str).collect::<Vec<_>>()),
        );
        m.insert("D", json!(self.d.to_string()));
        m.insert("D_value", json!(self.d.value(r_norm)));
        m.insert("r_norm", json!(r_norm));
        m.insert("Q", json!(self.q));
        json!(m)
    }
}

impl fmt::Display for ScaledData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.c.iter().map(rat_str).collect();
        write!(f, "c = ({}), D = {}", c.join(", "), self.d)?;
        if let Some(q) = self.q {
            write!(f, ", Q = {q}")?;
        }
        Ok(())
    }
}

/// Data of the main inequality on `H(d, α)`:
/// `c_j = 1/(d+2n+1)` for the commuting directions, `(n+1)/(n(d+2n+1))` for the
/// paired ones, `D = 3/(d+2n+1) ln‖R‖ − Σ ln α_i / (n(d+2n+1))`.
pub fn corank_constants(g: &CorankGroup) -> ScaledData {
    let (d, n) = (g.d(), g.n());
    let m = d + 2 * n + 1;
    let mut c = vec![rat(1, m); d];
    c.extend(std::iter::repeat_n(rat(n + 1, n * m), 2 * n));
    let mut dconst = LogConstant {
        r_coeff: rat(3, m),
        ..LogConstant::zero()
    };
    for &a in g.alpha() {
        dconst = dconst.add(&LogConstant {
            r_coeff: Rational::from_integer(0),
            alpha_terms: vec![(a, -rat(1, n * m))],
            offset: 0.0,
        });
    }
    ScaledData::new(c, dconst, Some(g.homogeneous_dim())).expect("weights sum to Q/(Q-1)")
}

/// The inequality on `H¹` after `t ↦ αt`: `c = (2/3, 2/3)`, `D = ln‖R‖ − (1/3) ln α`.
pub fn h1_entropy_constant(alpha: f64) -> Result<ScaledData> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidGroup(format!("α must be positive, got {alpha}")));
    }
    let mut d = LogConstant {
        r_coeff: Rational::from_integer(1),
        ..LogConstant::zero()
    };
    if alpha != 1.0 {
        d.alpha_terms.push((alpha, rat(1, 3) * -1));
    }
    ScaledData::new(vec![rat(2, 3); 2], d, Some(4))
}

/// Classical Loomis-Whitney on `ℝ^k`: `c_j = 1/(k-1)`, `D = 0`.
pub fn euclidean_constants(k: usize) -> Result<ScaledData> {
    if k < 2 {
        return Err(Error::InvalidScaledData(format!(
            "Euclidean Loomis-Whitney needs k ≥ 2, got {k}"
        )));
    }
    ScaledData::new(vec![rat(1, k - 1); k], LogConstant::zero(), Some(k))
}

fn check_sum(a: &ScaledData) -> Result<Rational> {
    let s = a.sum_c();
    if s <= Rational::from_integer(1) {
        return Err(Error::InvalidScaledData(format!(
            "weights sum to {}, need more than 1",
            rat_str(&s)
        )));
    }
    Ok(s)
}

/// Data on the product `Ω × Ω'` from data on each factor:
/// `c̄ = (c·B, c'·A)/(ΣcΣc' − 1)` and `D̄ = (B·D + A·D')/(ΣcΣc' − 1)`
/// with `A = Σc − 1`, `B = Σc' − 1`.
pub fn product_combine(a: &ScaledData, b: &ScaledData) -> Result<ScaledData> {
    let sa = check_sum(a)?;
    let sb = check_sum(b)?;
    let one = Rational::from_integer(1);
    let (ea, eb) = (sa - one, sb - one);
    let den = sa * sb - one;
    let mut c: Vec<Rational> = a.c.iter().map(|x| x * eb / den).collect();
    c.extend(b.c.iter().map(|x| x * ea / den));
    let d = a.d.scale(eb / den).add(&b.d.scale(ea / den));
    let q = match (a.q, b.q) {
        (Some(p), Some(q)) => Some(p + q),
        _ => None,
    };
    ScaledData::new(c, d, q)
}

/// Data on `ℝ × Ω`, new coordinate first:
/// `c̄ = ((Σc − 1)/Σc, c/Σc)` and `D̄ = D/Σc`.
pub fn product_combine_line(a: &ScaledData) -> Result<ScaledData> {
    let s = check_sum(a)?;
    let one = Rational::from_integer(1);
    let mut c = vec![(s - one) / s];
    c.extend(a.c.iter().map(|x| x / s));
    ScaledData::new(c, a.d.scale(s.recip()), a.q.map(|q| q + 1))
}

/// `C(d, α) = ‖R‖^{3/(d+2n+1)} / (∏α_i)^{1/(n(d+2n+1))}`.
pub fn lw_constant(g: &CorankGroup, r_norm: f64) -> f64 {
    corank_constants(g).d().value(r_norm).exp()
}
