//! Numerical verification of the inequalities: multilinear forms, entropy
//! subadditivity, the proof-chain steps, product constants and the Sobolev and
//! isoperimetric consequences.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

mod constants;
mod geometry;
pub mod inputs;
mod lw;
mod proof_chain;
mod raster;
mod sobolev;

pub use constants::{
    corank_constants, euclidean_constants, h1_entropy_constant, lw_constant, product_combine,
    product_combine_line, LogConstant, Rational, ScaledData,
};
pub use geometry::{multilinear_lhs, Geometry, PullbackProduct, Quadrature};
pub use lw::{
    duality_bridge, euclidean_multilinear_lhs, mcc2_residual, subadditivity_check,
    subadditivity_check_euclidean, verify_lw, verify_nonlinear_lw, verify_set_lw,
    verify_set_lw_euclidean, DualityBridge,
};
pub use proof_chain::{proof_chain_checks, proof_chain_source, ProofChain};
pub use raster::Raster;
pub use sobolev::{
    horizontal_gradient_grid, isoperimetric_check, level_set_check, mollify, sobolev_check,
    sobolev_constant, LevelSetOptions,
};

/// Outcome of one inequality check `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub deficit: f64,
    pub tolerance: f64,
    /// `deficit ≥ −tolerance`.
    pub pass: bool,
    pub metadata: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let deficit = rhs - lhs;
        Report {
            name: name.into(),
            lhs,
            rhs,
            deficit,
            tolerance,
            pass: deficit >= -tolerance,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `lhs / rhs` (0 when both vanish).
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 && self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Tolerance model. Smooth quadratures are second order in the largest cell
/// side; rasterized set measures are first order.
pub mod tolerance {
    /// Relative quadrature tolerance per `h²`.
    pub const QUADRATURE: f64 = 1.0;
    /// Absolute entropy tolerance (nats) per `h²` and per entropy term.
    pub const ENTROPY: f64 = 1.0;
    /// Relative raster tolerance per `h`.
    pub const RASTER: f64 = 2.0;

    pub fn quadrature(h: f64, scale: f64) -> f64 {
        QUADRATURE * h * h * scale.abs()
    }

    pub fn entropy(h: f64, terms: f64) -> f64 {
        ENTROPY * h * h * terms.max(1.0)
    }

    pub fn raster(h: f64, scale: f64) -> f64 {
        RASTER * h * scale.abs()
    }
}
