//! Two cohesive groups voting on stochastically generated proposals.
//!
//! Every proposal assigns each participant an independent N(μ, σ²) capital
//! increment. A group supports a proposal when the average increment of its
//! members is at least its claim threshold, and the groups' votes are combined
//! by one of two rules: accept only with the support of both groups, or accept
//! with the support of either.
//!
//! - [`gaussian`]: normal density, distribution function and truncated means.
//! - [`model`]: closed-form expected one-step increments.
//! - [`optimize`]: optimal claim thresholds and the society-optimal system.
//! - [`montecarlo`]: seedable simulator of the voting-controlled random walk.
//! - [`cli`]: the `vote-walk` command line.

pub mod cli;
pub mod error;
pub mod gaussian;
pub mod model;
pub mod montecarlo;
pub mod optimize;

pub use error::{Error, Result};
pub use model::{EnvironmentParams, ExpectationReport, Group, GroupSpec, VotingRule};
pub use montecarlo::{SimConfig, SimMode, WalkResult};
pub use optimize::{Objective, OptimumResult, SystemSolution};
