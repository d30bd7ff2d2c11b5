//! Loomis-Whitney and Brascamp-Lieb inequalities on corank-1 Carnot groups.
//!
//! - [`group`]: the groups `H(d, α)`, their projections and dilations.
//! - [`density`]: grid densities, entropy, marginals and pushforwards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brascamp_lieb;
pub mod density;
pub mod error;
pub mod group;
pub mod harness;
pub mod par;
pub mod radon;

pub use error::{Error, Result};
