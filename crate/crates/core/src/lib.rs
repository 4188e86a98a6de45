//! Bounded-rational decision-making with Wasserstein information costs.
//!
//! - [`ot`]: discrete optimal transport (exact transportation simplex, 1-D
//!   closed form, entropic approximation).
//! - [`info`]: information costs `I(pi, q)` and prior constructors.
//! - [`envs`]: repeated public goods game and a finite-MDP container.
//! - [`agents`]: penalized best responses, regularized policy iteration and
//!   public-goods self-play.
//! - [`analysis`]: contribution panels, metric tables and decision-change
//!   statistics.

pub mod agents;
pub mod analysis;
pub mod envs;
pub mod error;
pub mod info;
pub mod ot;
pub mod rng;

pub use error::{Error, Result};
